from rest_framework import serializers as drf_serializers

from market.choice import sales_to_distribution
from market.constrained import AllAssortments, solve_bms_constrained
from market.exceptions import InfeasibleConstraintFamily, MalformedInput
from market.serializers import (
    ConstrainedSolutionSerializer,
    ConstraintFamilyField,
    DeterministicSolutionSerializer,
    DistributionSerializer,
    InstanceSerializer,
    StaticSolutionSerializer,
    SupportSolutionSerializer,
)
from market.static import solve_bms, solve_bms_bruteforce, solve_bms_deterministic

from ._base import MarketCommand, load_json, parse_json_option, validated


def parse_family(raw, n):
    try:
        return ConstraintFamilyField(n=n).run_validation(parse_json_option(raw, "--constraint"))
    except drf_serializers.ValidationError as exc:
        raise MalformedInput("Invalid constraint family.", errors=exc.detail) from exc


def solve_family(inst, family, threads=None):
    solution = solve_bms_constrained(inst, family.oracle(), predicate=family, threads=threads)
    if not solution.feasible:
        raise InfeasibleConstraintFamily(
            "No nonempty assortment in the family is feasible.", family=family.to_json()
        )
    return solution


class Command(MarketCommand):
    help = "Solve the balanced market-share assortment problem for a static instance."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("instance", help="Instance JSON file ({r, v, alpha}); - for stdin.")
        parser.add_argument("--alpha", type=float, help="Override the balancing level of the file.")
        mode = parser.add_mutually_exclusive_group()
        mode.add_argument("--deterministic", action="store_true", help="Best single balanced assortment.")
        mode.add_argument("--brute", action="store_true", help="Support enumeration with LPs, cross-checked.")
        mode.add_argument("--constraint", help='Constraint family JSON (or @file), e.g. {"max_card": 3}.')
        parser.add_argument("--emit-distribution", action="store_true",
                            help="Include the nested assortment distribution that realizes the sales.")
        parser.add_argument("--threads", type=int, help="Worker threads for constrained oracle calls.")

    def run(self, *args, **options):
        inst = validated(InstanceSerializer, load_json(options["instance"])).to_instance(alpha=options["alpha"])
        xs = None
        if options["deterministic"]:
            solution = solve_bms_deterministic(inst)
            data = DeterministicSolutionSerializer(solution).data
        elif options["brute"]:
            solution = solve_bms_bruteforce(inst)
            closed_form = solve_bms(inst)
            xs = solution.xs
            data = SupportSolutionSerializer(solution).data
            data["closed_form_revenue"] = closed_form.revenue
            data["agrees"] = abs(solution.revenue - closed_form.revenue) <= 1e-7 * max(1.0, closed_form.revenue)
        elif options["constraint"] is not None:
            family = parse_family(options["constraint"], inst.n)
            if isinstance(family, AllAssortments):
                solution = solve_bms(inst)
                data = StaticSolutionSerializer(solution).data
            else:
                solution = solve_family(inst, family, options["threads"])
                data = ConstrainedSolutionSerializer(solution).data
            data["constraint"] = family.to_json()
            xs = solution.xs
        else:
            solution = solve_bms(inst)
            xs = solution.xs
            data = StaticSolutionSerializer(solution).data
        data["alpha"] = inst.alpha
        if options["emit_distribution"]:
            if xs is None:
                data["distribution"] = {"entries": [
                    {"assortment": list(solution.assortment), "probability": 1.0}
                ]} if solution.assortment else {"entries": []}
            else:
                data["distribution"] = DistributionSerializer(sales_to_distribution(inst, xs)).data
        self.emit(data, options)
