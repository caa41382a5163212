"""Six discrete cluster color schemes plus a sequential attribute ramp."""

from __future__ import annotations

# Six qualitative schemes, eight colors each; cluster index wraps around.
SCHEMES: tuple[tuple[str, ...], ...] = (
    ("#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00", "#ffff33", "#a65628", "#f781bf"),
    ("#66c2a5", "#fc8d62", "#8da0cb", "#e78ac3", "#a6d854", "#ffd92f", "#e5c494", "#b3b3b3"),
    ("#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"),
    ("#a6cee3", "#1f78b4", "#b2df8a", "#33a02c", "#fb9a99", "#e31a1c", "#fdbf6f", "#ff7f00"),
    ("#7fc97f", "#beaed4", "#fdc086", "#ffff99", "#386cb0", "#f0027f", "#bf5b17", "#666666"),
    ("#fbb4ae", "#b3cde3", "#ccebc5", "#decbe4", "#fed9a6", "#ffffcc", "#e5d8bd", "#fddaec"),
)

NEUTRAL_EDGE = "#999999"

SHAPES = ("circle", "square", "triangle")


def cluster_color(cluster_index: int, scheme_index: int = 0) -> str:
    scheme = SCHEMES[scheme_index % len(SCHEMES)]
    return scheme[cluster_index % len(scheme)]


def cluster_shape(cluster_index: int) -> str:
    return SHAPES[cluster_index % len(SHAPES)]


def value_color(v: float) -> str:
    """Blue (0) to red (1) ramp for standardized attribute values."""
    t = min(max(float(v), 0.0), 1.0)
    r = round(59 + t * (214 - 59))
    g = round(76 + t * (39 - 76))
    b = round(192 + t * (40 - 192))
    return f"#{r:02x}{g:02x}{b:02x}"
