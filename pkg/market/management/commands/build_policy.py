from market.policy import PolicyKind, build_heuristic_spec, build_policy
from market.serializers import DynamicInstanceSerializer, PolicySpecSerializer
from market.upper_bound import solve_upper_bound

from ._base import MarketCommand, load_json, validated

KINDS = ("auto", PolicyKind.HEURISTIC_1.value, PolicyKind.HEURISTIC_2.value)
METHODS = ("default", "auto", "exact", "alpha1", "fptas")


def make_spec(dyn, kind="auto", eps=0.1, eps2=None, method="default"):
    """Policy for ``dyn``; ``method`` picks the upper-bound solver behind it."""
    upper_bound = None
    if method != "default" or kind != "auto":
        upper_bound = solve_upper_bound(dyn, method="auto" if method == "default" else method, eps=eps / 2.0)
    if kind == "auto":
        return build_policy(dyn, eps=eps, upper_bound=upper_bound, eps2=eps2)
    return build_heuristic_spec(dyn, PolicyKind(kind), upper_bound)


class Command(MarketCommand):
    help = "Build the dynamic inventory policy (or a resolving heuristic) for a dynamic instance."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("instance", help="Dynamic instance JSON file; - for stdin.")
        parser.add_argument("--eps", type=float, default=0.1, help="Accuracy of the underlying upper bound.")
        parser.add_argument("--eps2", type=float, help="Bisection precision (alpha < 1).")
        parser.add_argument("--kind", choices=KINDS, default="auto",
                            help="auto builds the calibrated (alpha < 1) or capped (alpha = 1) policy.")
        parser.add_argument("--method", choices=METHODS, default="default",
                            help="Upper-bound solver; default uses the FPTAS (alpha < 1) or equal-sales solver.")
        parser.add_argument("--alpha", type=float, help="Override the balancing level of the file.")

    def run(self, *args, **options):
        dyn = validated(DynamicInstanceSerializer, load_json(options["instance"])).to_instance(alpha=options["alpha"])
        spec = make_spec(dyn, options["kind"], options["eps"], options["eps2"], options["method"])
        self.emit(PolicySpecSerializer(spec).data, options)
