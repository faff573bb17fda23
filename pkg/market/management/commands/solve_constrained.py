from market.choice import sales_to_distribution
from market.serializers import ConstrainedSolutionSerializer, DistributionSerializer, InstanceSerializer
from market.static import solve_bms_bruteforce

from ._base import MarketCommand, load_json, validated
from .solve_static import parse_family, solve_family


class Command(MarketCommand):
    help = "Solve the balanced assortment problem over a constraint family through its oracle."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("instance", help="Instance JSON file ({r, v, alpha}); - for stdin.")
        parser.add_argument("--constraint", default='"all"',
                            help='Constraint family JSON (or @file): "all", {"max_card": k}, '
                                 '{"min_card": k} or {"categories": [{"ids": [...], "min_count": m}]}.')
        parser.add_argument("--alpha", type=float, help="Override the balancing level of the file.")
        parser.add_argument("--threads", type=int, help="Worker threads for oracle calls.")
        parser.add_argument("--brute", action="store_true",
                            help="Cross-check against support enumeration restricted to the family.")
        parser.add_argument("--emit-distribution", action="store_true")

    def run(self, *args, **options):
        inst = validated(InstanceSerializer, load_json(options["instance"])).to_instance(alpha=options["alpha"])
        family = parse_family(options["constraint"], inst.n)
        solution = solve_family(inst, family, options["threads"])
        data = ConstrainedSolutionSerializer(solution).data
        data["constraint"] = family.to_json()
        data["alpha"] = inst.alpha
        if options["brute"]:
            exhaustive = solve_bms_bruteforce(inst, predicate=family)
            best = exhaustive.revenue if exhaustive is not None else 0.0
            data["exhaustive_revenue"] = best
            data["agrees"] = abs(solution.revenue - best) <= 1e-7 * max(1.0, best)
        if options["emit_distribution"]:
            data["distribution"] = DistributionSerializer(sales_to_distribution(inst, solution.xs)).data
        self.emit(data, options)
