"""Hurricane exposure features and the synthetic training corpus.

Feature space is two normalized coordinates per component: sustained wind
speed at the component (fraction of max_wind_mph) and distance from the
storm track (fraction of max_distance_km).  The synthetic corpus draws
winds from Saffir-Simpson category bands per class and places distances so
the classes occupy three parallel bands of a hazard score that discounts
wind by distance; that reproduces the slanted decision regions field
studies show (closer components fail at lower winds)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .multiclass import ClassLabel

# one-minute sustained wind bands, mph (category 5 capped at max wind)
CATEGORY_WIND_MPH = {
    1: (74.0, 95.0),
    2: (96.0, 110.0),
    3: (111.0, 129.0),
    4: (130.0, 156.0),
    5: (157.0, 200.0),
}

CLASS_CATEGORIES = {
    ClassLabel.OPERATIONAL: (1,),
    ClassLabel.UNCERTAIN: (2, 3),
    ClassLabel.OUTAGE: (4, 5),
}

DEFAULT_MAX_WIND_MPH = 200.0
DEFAULT_MAX_DISTANCE_KM = 500.0
DEFAULT_NOISE_SIGMA = 0.004
DEFAULT_CROSSOVER_COUNT = 22.0
DEFAULT_CORRIDOR_WIDTH = 0.325
DEFAULT_HAZARD_SLOPE = 0.7
DEFAULT_UNCERTAIN_BAND_HEIGHT = 0.009
DEFAULT_OPERATIONAL_DEPTH = 0.5
DEFAULT_OUTAGE_DEPTH = 0.3
DEFAULT_COUNTS = {
    ClassLabel.OUTAGE: 300,
    ClassLabel.OPERATIONAL: 300,
    ClassLabel.UNCERTAIN: 150,
}

# Highest normalized wind the operational class must fit below its band top
# at the far edge of the map (mean category-1 wind plus ~2 sigma); the
# operational band ceiling is this minus the hazard slope.
OPERATIONAL_WIND_CEILING = 0.474

# Category a crossover sample is generated at: the neighbor-class category
# adjacent to the crossing class's own band.  A surviving outage-band
# component saw marginally lower (category 3) hazard, a failing
# operational one marginally higher (category 2), and the middle class
# misbehaves at its immediate neighbors.
CROSSOVER_CATEGORY = {
    (ClassLabel.OPERATIONAL, ClassLabel.UNCERTAIN): 2,
    (ClassLabel.UNCERTAIN, ClassLabel.OPERATIONAL): 1,
    (ClassLabel.UNCERTAIN, ClassLabel.OUTAGE): 4,
    (ClassLabel.OUTAGE, ClassLabel.UNCERTAIN): 3,
}

_DATASET_HEADER = "wind,distance,label"


@dataclass(frozen=True)
class SyntheticSpec:
    """Knobs for the synthetic corpus.

    Each class occupies a band of the hazard score h = wind -
    hazard_slope * distance: operational below, uncertain in a narrow
    middle shelf, outage above.  Neighboring bands are separated by empty
    corridors of Euclidean width corridor_width; without them a weakly
    regularized trainer lets the larger class of a pairwise problem push
    its boundary clear across the smaller one and the middle class
    disappears at low penalty values.

    crossover_count is the expected number of samples per band edge per
    direction that are drawn from the neighboring class's distribution but
    keep their own label (storm-hardened components that survive
    band-level hazard, fragile ones that fail early).  Such samples are
    statistically indistinguishable from the neighbor, so they cap
    accuracy at roughly 1 - 4 * crossover_count / n for every kernel and
    penalty; keeping the two directions of an edge balanced holds the
    trained boundary on the corridor midline.

    operational_depth / outage_depth cap how far the outer bands extend
    away from their corridors, in hazard units.
    """

    counts: dict = field(default_factory=lambda: dict(DEFAULT_COUNTS))
    max_wind_mph: float = DEFAULT_MAX_WIND_MPH
    max_distance_km: float = DEFAULT_MAX_DISTANCE_KM
    noise_sigma: float = DEFAULT_NOISE_SIGMA
    crossover_count: float = DEFAULT_CROSSOVER_COUNT
    corridor_width: float = DEFAULT_CORRIDOR_WIDTH
    hazard_slope: float = DEFAULT_HAZARD_SLOPE
    uncertain_band_height: float = DEFAULT_UNCERTAIN_BAND_HEIGHT
    operational_depth: float = DEFAULT_OPERATIONAL_DEPTH
    outage_depth: float = DEFAULT_OUTAGE_DEPTH
    seed: int = 0


@dataclass
class Dataset:
    """Normalized feature rows (wind, distance) plus class labels."""

    features: np.ndarray  # (n, 2) float64 in [0, 1]
    labels: np.ndarray  # (n,) int64 of ClassLabel values

    def __len__(self) -> int:
        return int(self.features.shape[0])

    def class_counts(self) -> dict:
        return {cls: int(np.sum(self.labels == cls)) for cls in ClassLabel}


def category_midpoint(category: int) -> float:
    lo, hi = CATEGORY_WIND_MPH[category]
    return 0.5 * (lo + hi)


def sample_wind_speed(category: int, rng: np.random.Generator, max_wind_mph: float = DEFAULT_MAX_WIND_MPH) -> float:
    """Draw one sustained wind for a category: normal at the band midpoint
    with sigma = band width / 4, clamped to [0, max]."""
    lo, hi = CATEGORY_WIND_MPH[category]
    draw = rng.normal(0.5 * (lo + hi), (hi - lo) / 4.0)
    return float(min(max(draw, 0.0), max_wind_mph))


def hazard_score(wind: float, distance: float, slope: float = DEFAULT_HAZARD_SLOPE) -> float:
    """Wind discounted by distance; the synthetic classes band along it."""
    return wind - slope * distance


@dataclass(frozen=True)
class _BandLayout:
    """Hazard-score geometry derived from a spec: band edges and the two
    corridor midlines the trained boundaries should land on."""

    op_top: float
    safe_boundary: float
    unc_lo: float
    unc_hi: float
    failure_boundary: float
    out_lo: float
    corridor_h: float  # corridor width in hazard units


def _band_layout(spec: SyntheticSpec) -> _BandLayout:
    # a Euclidean gap of G across a hazard contour spans G * sqrt(1 + a^2)
    # hazard units (the hazard gradient is (1, -a))
    g = spec.corridor_width * float(np.sqrt(1.0 + spec.hazard_slope**2))
    op_top = OPERATIONAL_WIND_CEILING - spec.hazard_slope
    unc_lo = op_top + g
    unc_hi = unc_lo + spec.uncertain_band_height
    return _BandLayout(
        op_top=op_top,
        safe_boundary=op_top + 0.5 * g,
        unc_lo=unc_lo,
        unc_hi=unc_hi,
        failure_boundary=unc_hi + 0.5 * g,
        out_lo=unc_hi + g,
        corridor_h=g,
    )


def _band_interval(label: ClassLabel, w: float, spec: SyntheticSpec, lay: _BandLayout) -> tuple[float, float]:
    """Feasible hazard range of the class band at normalized wind w.

    d in [0, 1] restricts h to [w - slope, w]; the box can pinch a band to
    a point for tail winds (a rare sample parks on the map edge).
    """
    h_min, h_max = w - spec.hazard_slope, w
    if label is ClassLabel.OPERATIONAL:
        lo = max(h_min, lay.op_top - spec.operational_depth)
        return min(lo, lay.op_top), min(h_max, lay.op_top)
    if label is ClassLabel.OUTAGE:
        hi = min(h_max, lay.out_lo + spec.outage_depth)
        return max(h_min, min(lay.out_lo, hi)), max(hi, min(lay.out_lo, h_max))
    return max(h_min, min(lay.unc_lo, h_max)), min(h_max, max(lay.unc_hi, h_min))


def _crossover_target(label: ClassLabel, u_dir: float, spec: SyntheticSpec) -> ClassLabel:
    """Class whose distribution this sample is drawn from.

    u_dir decides whether (and for the middle class, which way) the sample
    crosses into a neighboring band; clean samples keep their own class.
    """
    p = spec.crossover_count / max(spec.counts.get(label, 1), 1)
    if label is ClassLabel.UNCERTAIN:
        if u_dir < p:  # hardened: holds up under failure-band hazard
            return ClassLabel.OPERATIONAL
        if u_dir < 2.0 * p:  # fragile: fails at middle-band hazard
            return ClassLabel.OUTAGE
    elif label is ClassLabel.OPERATIONAL and u_dir < p:
        return ClassLabel.UNCERTAIN
    elif label is ClassLabel.OUTAGE and u_dir < p:
        return ClassLabel.UNCERTAIN
    return label


def generate_dataset(spec: SyntheticSpec | None = None) -> Dataset:
    """Deterministic synthetic corpus for a given spec.

    Classes are generated in label order; for each sample a category is
    drawn uniformly from the category set of the class whose distribution
    the sample follows (crossovers use the neighbor class at the adjacent
    category), wind from the category band, a hazard value uniformly
    inside that class's band at that wind, and distance follows from the
    two.  Small Gaussian jitter (noise_sigma, normalized units) is added
    to both coordinates before clamping to [0, 1].
    """
    spec = spec or SyntheticSpec()
    lay = _band_layout(spec)
    rng = np.random.default_rng(spec.seed)
    rows = []
    labels = []
    for label in ClassLabel:
        count = int(spec.counts.get(label, 0))
        for _ in range(count):
            target = _crossover_target(label, float(rng.uniform()), spec)
            if target is label:
                cats = CLASS_CATEGORIES[target]
                cat = cats[int(rng.integers(0, len(cats)))]
            else:
                cat = CROSSOVER_CATEGORY[(label, target)]
            wind = sample_wind_speed(cat, rng, spec.max_wind_mph)
            w = wind / spec.max_wind_mph
            lo, hi = _band_interval(target, w, spec, lay)
            h = float(rng.uniform(lo, hi)) if hi > lo else lo
            d = (w - h) / spec.hazard_slope
            w_noisy = w + rng.normal(0.0, spec.noise_sigma)
            d_noisy = d + rng.normal(0.0, spec.noise_sigma)
            rows.append((min(max(w_noisy, 0.0), 1.0), min(max(d_noisy, 0.0), 1.0)))
            labels.append(int(label))
    return Dataset(np.asarray(rows, dtype=np.float64), np.asarray(labels, dtype=np.int64))


def normalize_features(
    wind_mph: float,
    distance_km: float,
    max_wind_mph: float = DEFAULT_MAX_WIND_MPH,
    max_distance_km: float = DEFAULT_MAX_DISTANCE_KM,
) -> tuple[float, float]:
    """Scale raw (mph, km) readings by their maxima and clamp to [0, 1]."""
    if wind_mph < 0.0 or distance_km < 0.0:
        raise ValueError("wind and distance must be nonnegative")
    if max_wind_mph <= 0.0 or max_distance_km <= 0.0:
        raise ValueError("normalization maxima must be positive")
    return (
        min(wind_mph / max_wind_mph, 1.0),
        min(distance_km / max_distance_km, 1.0),
    )


@dataclass
class HurricaneForecast:
    """Storm track polyline with per-waypoint category and eye wind."""

    track_km: np.ndarray  # (w, 2) waypoint coordinates
    categories: np.ndarray  # (w,) ints 1..5
    eye_wind_mph: np.ndarray  # (w,) floats

    def __post_init__(self):
        self.track_km = np.asarray(self.track_km, dtype=np.float64).reshape(-1, 2)
        self.categories = np.asarray(self.categories, dtype=np.int64).ravel()
        self.eye_wind_mph = np.asarray(self.eye_wind_mph, dtype=np.float64).ravel()
        if self.track_km.shape[0] < 1:
            raise ValueError("forecast needs at least one waypoint")
        if not (self.track_km.shape[0] == self.categories.shape[0] == self.eye_wind_mph.shape[0]):
            raise ValueError("waypoints, categories and eye winds must align")
        for cat in self.categories:
            if int(cat) not in CATEGORY_WIND_MPH:
                raise ValueError(f"unknown hurricane category {cat}")
        if (self.eye_wind_mph < 0).any():
            raise ValueError("eye winds must be nonnegative")


def save_forecast(forecast: HurricaneForecast, path: str) -> None:
    payload = {
        "track_km": forecast.track_km.tolist(),
        "categories": forecast.categories.tolist(),
        "eye_wind_mph": forecast.eye_wind_mph.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_forecast(path: str) -> HurricaneForecast:
    with open(path) as fh:
        payload = json.load(fh)
    track = payload["track_km"]
    cats = payload["categories"]
    eye = payload.get("eye_wind_mph")
    if eye is None:
        eye = [category_midpoint(int(c)) for c in cats]
    return HurricaneForecast(track, cats, eye)


@dataclass(frozen=True)
class ComponentSite:
    component_id: str
    location_km: tuple[float, float]


def _point_segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        diff = p - a
        return float(np.sqrt(diff @ diff))
    t = float((p - a) @ ab) / denom
    t = min(max(t, 0.0), 1.0)
    closest = a + t * ab
    diff = p - closest
    return float(np.sqrt(diff @ diff))


def track_distance_km(location_km, forecast: HurricaneForecast) -> float:
    """Shortest distance from a point to the track polyline."""
    p = np.asarray(location_km, dtype=np.float64).ravel()
    pts = forecast.track_km
    if pts.shape[0] == 1:
        diff = p - pts[0]
        return float(np.sqrt(diff @ diff))
    return min(
        _point_segment_distance(p, pts[i], pts[i + 1]) for i in range(pts.shape[0] - 1)
    )


def nearest_waypoint(location_km, forecast: HurricaneForecast) -> int:
    """Index of the closest waypoint; ties resolve to the lowest index."""
    p = np.asarray(location_km, dtype=np.float64).ravel()
    diff = forecast.track_km - p[None, :]
    return int(np.argmin(np.einsum("ij,ij->i", diff, diff)))


def component_features(
    site: ComponentSite,
    forecast: HurricaneForecast,
    max_distance_km: float = DEFAULT_MAX_DISTANCE_KM,
) -> tuple[float, float]:
    """Raw (wind_mph, distance_km) for one component.

    Wind is the eye wind at the nearest waypoint attenuated linearly with
    track distance, reaching zero at max_distance_km.
    """
    d = track_distance_km(site.location_km, forecast)
    eye = float(forecast.eye_wind_mph[nearest_waypoint(site.location_km, forecast)])
    wind = eye * max(0.0, 1.0 - d / max_distance_km)
    return wind, d


def save_dataset(dataset: Dataset, path: str) -> None:
    lines = [_DATASET_HEADER]
    for (w, d), lab in zip(dataset.features, dataset.labels):
        lines.append(f"{float(w)!r},{float(d)!r},{ClassLabel(int(lab))}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_dataset(path: str) -> Dataset:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != _DATASET_HEADER:
        raise ValueError(f"dataset file must start with header {_DATASET_HEADER!r}")
    rows = []
    labels = []
    for ln in lines[1:]:
        wind, dist, label = ln.split(",")
        rows.append((float(wind), float(dist)))
        labels.append(int(ClassLabel.parse(label)))
    features = np.asarray(rows, dtype=np.float64).reshape(-1, 2)
    if features.size and ((features < 0.0).any() or (features > 1.0).any()):
        raise ValueError("dataset features must lie in [0, 1]")
    return Dataset(features, np.asarray(labels, dtype=np.int64))
