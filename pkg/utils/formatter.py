from decimal import Decimal, ROUND_HALF_UP
import math

from jinja2 import Template


def clean_text(text: str) -> str:
    """Remove extra whitespace and unwanted newlines."""
    return " ".join(text.split())


def fixed(value: float, places: int = 4) -> str:
    """
    Format a number with a fixed count of decimals, rounding half up.

    Works on the shortest repr of the float so 4.28125 prints as 4.2813, the
    way printed tables round. Output never depends on the system locale.
    """
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    quantum = Decimal(1).scaleb(-places)
    rounded = Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_HALF_UP)
    if rounded == 0:
        rounded = abs(rounded)
    return f"{rounded:f}"


def format_number(value: float) -> str:
    """Integers print without a decimal point; everything else uses repr."""
    value = float(value)
    if value.is_integer():
        return str(int(value))
    return repr(value)


def format_duration(seconds: float) -> str:
    """Format an offset in seconds as H:MM:SS, prefixed with days when needed."""
    total = int(round(seconds))
    days, rest = divmod(total, 86400)
    hours, rest = divmod(rest, 3600)
    minutes, secs = divmod(rest, 60)
    clock = f"{hours}:{minutes:02d}:{secs:02d}"
    return f"{days}d {clock}" if days else clock


SUMMARY_TEMPLATE = Template(
    "Campaign summary{% if source %} ({{ source }}){% endif %}\n"
    "reach: {{ reach }}\n"
    "generations: {{ generations }}\n"
    "super-critical generations: "
    "{% if super_set %}{{ super_set | join(', ') }}{% else %}none{% endif %}\n"
    "peak generation: {{ peak_generation }}\n"
    "etp ratios: {{ etp_ratios | join(' ') }}\n"
    "{% if seed_records is not none %}seed records: {{ seed_records }}\n{% endif %}"
    "{% if orphans is not none %}orphan records: {{ orphans }}\n{% endif %}"
    "{% if promoted is not none %}orphan senders promoted to seeds: {{ promoted }}\n{% endif %}"
    "{% if attempts is not none %}repeat attempts: {{ attempts }}\n{% endif %}"
    "{% if diagnostics %}malformed lines: {{ diagnostics }}\n{% endif %}"
)


def format_summary(summary, source: str = "", orphans=None, promoted=None,
                   attempts=None, diagnostics: int = 0, seed_records=None) -> str:
    """Render a CampaignSummary as the plain-text report written next to the CSVs."""
    return SUMMARY_TEMPLATE.render(
        source=clean_text(source),
        reach=format_number(summary.reach),
        generations=summary.generations,
        super_set=sorted(summary.super_set),
        peak_generation=summary.peak_generation,
        etp_ratios=[fixed(r, 4) if not math.isnan(r) else "-" for r in summary.etp_ratios],
        orphans=orphans,
        promoted=promoted,
        attempts=attempts,
        seed_records=seed_records,
        diagnostics=diagnostics,
    )
