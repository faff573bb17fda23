from market.serializers import DynamicInstanceSerializer, UpperBoundSolutionSerializer
from market.upper_bound import check_upper_bound_feasible, solve_upper_bound

from ._base import MarketCommand, load_json, validated


class Command(MarketCommand):
    help = "Solve the fluid upper-bound problem of a dynamic instance."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("instance", help="Dynamic instance JSON file ({r, v, alpha, T, c}); - for stdin.")
        parser.add_argument("--eps", type=float, default=0.05, help="FPTAS accuracy, in (0, 0.5).")
        parser.add_argument("--alpha", type=float, help="Override the balancing level of the file.")
        method = parser.add_mutually_exclusive_group()
        method.add_argument("--exact", action="store_true", help="Exact support enumeration (small n).")
        method.add_argument("--alpha1", action="store_true", help="Exact equal-sales solver for alpha = 1.")
        method.add_argument("--auto", action="store_true", help="Pick the solver from n and alpha.")

    def run(self, *args, **options):
        dyn = validated(DynamicInstanceSerializer, load_json(options["instance"])).to_instance(alpha=options["alpha"])
        if options["exact"]:
            method = "exact"
        elif options["alpha1"]:
            method = "alpha1"
        elif options["auto"]:
            method = "auto"
        else:
            method = "fptas"
        solution = solve_upper_bound(dyn, method=method, eps=options["eps"])
        data = UpperBoundSolutionSerializer(solution).data
        data["violations"] = [
            {"constraint": v.constraint, "index": v.index, "magnitude": v.magnitude}
            for v in check_upper_bound_feasible(dyn, solution.xs)
        ]
        self.emit(data, options)
