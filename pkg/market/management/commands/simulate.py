from market.serializers import DynamicInstanceSerializer, PolicySpecSerializer, SimulationReportSerializer
from market.simulation import MODES, audit_balancing, simulate

from ._base import MarketCommand, load_json, validated
from .build_policy import KINDS, make_spec


class Command(MarketCommand):
    help = "Monte Carlo simulation of a policy over T periods."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("instance", help="Dynamic instance JSON file; - for stdin.")
        parser.add_argument("--policy", help="Policy JSON written by build_policy. Built on the fly when omitted.")
        parser.add_argument("--kind", choices=KINDS, default="auto", help="Policy to build when --policy is omitted.")
        parser.add_argument("--eps", type=float, default=0.1)
        parser.add_argument("--replicates", type=int, default=200)
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument("--mode", choices=MODES, default="direct",
                            help="direct samples purchases; faithful samples the offered assortment first.")
        parser.add_argument("--threads", type=int, help="Worker threads (falls back to FAIR_ASSORT_THREADS).")
        parser.add_argument("--upper-bound", type=float, help="Normalize revenue by this value.")
        parser.add_argument("--alpha", type=float, help="Override the balancing level of the file.")

    def run(self, *args, **options):
        dyn = validated(DynamicInstanceSerializer, load_json(options["instance"])).to_instance(alpha=options["alpha"])
        if options["policy"]:
            spec = validated(PolicySpecSerializer, load_json(options["policy"])).to_spec()
        else:
            spec = make_spec(dyn, options["kind"], options["eps"])
        report = simulate(
            dyn, spec, options["replicates"], options["seed"],
            mode=options["mode"], threads=options["threads"], upper_bound=options["upper_bound"],
        )
        audit = audit_balancing(report, dyn.alpha)
        data = SimulationReportSerializer(report).data
        data["balancing_audit"] = {"passed": audit.passed, "margin": audit.margin, "tol": audit.tol}
        self.emit(data, options)
