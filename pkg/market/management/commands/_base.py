import json
import logging
import sys
from pathlib import Path

import numpy as np
from django.core.management.base import BaseCommand, CommandError
from django.core.serializers.json import DjangoJSONEncoder

from market.exceptions import InvalidInstance, MalformedInput, MarketError


class MarketJSONEncoder(DjangoJSONEncoder):
    def default(self, o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, np.generic):
            return o.item()
        if isinstance(o, (set, frozenset)):
            return sorted(o)
        return super().default(o)


def load_json(path):
    """Read a JSON document from a file path, or stdin for "-"."""
    try:
        if str(path) == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as exc:
        raise MalformedInput("Cannot read input file.", path=str(path), reason=exc.strerror) from exc
    except json.JSONDecodeError as exc:
        raise MalformedInput("Input is not valid JSON.", path=str(path), line=exc.lineno, column=exc.colno) from exc


def parse_json_option(value, name):
    """Inline JSON, or @path to read it from a file."""
    if value.startswith("@"):
        return load_json(value[1:])
    try:
        return json.loads(value)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{name} is not valid JSON.", value=value) from exc


def validated(serializer_class, data, **kwargs):
    serializer = serializer_class(data=data, **kwargs)
    if not serializer.is_valid():
        raise InvalidInstance("Input failed validation: " + json.dumps(serializer.errors, sort_keys=True))
    return serializer


class MarketCommand(BaseCommand):
    """Base for market commands: JSON on stdout, logs on stderr, MarketError -> exit code."""

    def add_arguments(self, parser):
        parser.add_argument("-o", "--output", help="Write the result to this file instead of stdout.")
        parser.add_argument("--quiet", action="store_true", help="Suppress the result document on stdout.")

    def handle(self, *args, **options):
        if options.get("verbosity", 1) >= 2:
            logging.getLogger("market").setLevel(logging.DEBUG)
        try:
            return self.run(*args, **options)
        except MarketError as exc:
            raise CommandError(f"[{exc.default_code}] {exc}", returncode=exc.exit_code) from exc

    def run(self, *args, **options):
        raise NotImplementedError("subclasses of MarketCommand must provide a run() method")

    def emit(self, data, options) -> None:
        text = json.dumps(data, cls=MarketJSONEncoder, indent=2, sort_keys=False)
        output = options.get("output")
        if output:
            path = Path(output)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text + "\n", encoding="utf-8")
        elif not options.get("quiet"):
            self.stdout.write(text)
