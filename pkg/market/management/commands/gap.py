from market.exceptions import BoundViolation
from market.serializers import RandomizationGapSerializer
from market.static import make_gap_instance, value_of_randomization

from ._base import MarketCommand


class Command(MarketCommand):
    help = "Value of randomization on the gap instance, checked against its two-sided bounds."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--n", type=int, required=True)
        parser.add_argument("--alpha", type=float, nargs="+", required=True, help="One or more balancing levels.")

    def run(self, *args, **options):
        reports = []
        broken = []
        for alpha in options["alpha"]:
            gap = value_of_randomization(make_gap_instance(options["n"], alpha))
            data = RandomizationGapSerializer(gap).data
            data.update(n=options["n"], alpha=alpha)
            reports.append(data)
            if not (gap.within_upper_bound and gap.reaches_lower_bound):
                broken.append(alpha)
        self.emit(reports[0] if len(reports) == 1 else reports, options)
        if broken:
            raise BoundViolation("Randomization ratio outside its bounds.", n=options["n"], alpha=broken)
