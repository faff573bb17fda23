from market.generator import generate
from market.serializers import DynamicInstanceSerializer, GenConfigSerializer

from ._base import MarketCommand, validated


class Command(MarketCommand):
    help = "Generate a random dynamic instance."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--n", type=int, default=40)
        parser.add_argument("--T", type=int, required=True)
        parser.add_argument("--p0", type=float, required=True, help="No-purchase probability of the full assortment.")
        parser.add_argument("--gamma", type=float, required=True, help="Inventory tightness.")
        parser.add_argument("--alpha", type=float, required=True)
        parser.add_argument("--seed", type=int, default=0)

    def run(self, *args, **options):
        config = validated(GenConfigSerializer, {
            "n": options["n"], "T": options["T"], "P0": options["p0"],
            "gamma": options["gamma"], "alpha": options["alpha"], "seed": options["seed"],
        }).to_config()
        dyn = generate(config)
        self.emit(DynamicInstanceSerializer(dyn).data, options)
