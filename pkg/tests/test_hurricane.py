import numpy as np
import pytest

from stormsched.hurricane import (
    CATEGORY_WIND_MPH,
    CLASS_CATEGORIES,
    ComponentSite,
    HurricaneForecast,
    SyntheticSpec,
    _band_layout,
    _point_segment_distance,
    component_features,
    generate_dataset,
    hazard_score,
    load_dataset,
    load_forecast,
    nearest_waypoint,
    normalize_features,
    sample_wind_speed,
    save_dataset,
    save_forecast,
    track_distance_km,
)
from stormsched.multiclass import ClassLabel


def test_default_counts_and_shapes():
    ds = generate_dataset(SyntheticSpec())
    assert len(ds) == 750
    assert ds.features.shape == (750, 2)
    assert ds.features.dtype == np.float64
    assert ds.labels.dtype == np.int64
    counts = np.bincount(ds.labels, minlength=3)
    assert counts[ClassLabel.OPERATIONAL] == 300
    assert counts[ClassLabel.UNCERTAIN] == 150
    assert counts[ClassLabel.OUTAGE] == 300


def test_features_are_normalized():
    for seed in range(4):
        ds = generate_dataset(SyntheticSpec(seed=seed))
        assert np.all(ds.features >= 0.0)
        assert np.all(ds.features <= 1.0)


def test_generation_is_deterministic():
    a = generate_dataset(SyntheticSpec(seed=9))
    b = generate_dataset(SyntheticSpec(seed=9))
    assert np.array_equal(a.features, b.features)
    assert np.array_equal(a.labels, b.labels)
    c = generate_dataset(SyntheticSpec(seed=10))
    assert not np.array_equal(a.features, c.features)


def test_custom_counts_respected():
    spec = SyntheticSpec(counts={ClassLabel.OPERATIONAL: 40, ClassLabel.UNCERTAIN: 20, ClassLabel.OUTAGE: 40},
                         crossover_count=2.0)
    ds = generate_dataset(spec)
    counts = np.bincount(ds.labels, minlength=3)
    assert counts[ClassLabel.OPERATIONAL] == 40
    assert counts[ClassLabel.UNCERTAIN] == 20
    assert counts[ClassLabel.OUTAGE] == 40


def test_wind_draws_stay_in_category_band():
    # sigma is a quarter of the band width, so about 95% of draws land
    # inside the band itself
    rng = np.random.default_rng(0)
    draws = np.array([sample_wind_speed(3, rng) for _ in range(10000)])
    lo, hi = CATEGORY_WIND_MPH[3]
    assert np.mean((draws >= lo) & (draws <= hi)) >= 0.95
    assert np.all(draws >= 0.0)
    assert np.all(draws <= 200.0)


def test_category_wind_means_are_ordered():
    means = []
    for cat in range(1, 6):
        rng = np.random.default_rng(cat)
        means.append(np.mean([sample_wind_speed(cat, rng) for _ in range(2000)]))
    assert all(a < b for a, b in zip(means, means[1:]))


def test_category_bands_partition_severity():
    # class categories cover 1..5 once, in severity order
    cats = sorted(c for group in CLASS_CATEGORIES.values() for c in group)
    assert cats == [1, 2, 3, 4, 5]
    assert max(CLASS_CATEGORIES[ClassLabel.OPERATIONAL]) < min(CLASS_CATEGORIES[ClassLabel.UNCERTAIN])
    assert max(CLASS_CATEGORIES[ClassLabel.UNCERTAIN]) < min(CLASS_CATEGORIES[ClassLabel.OUTAGE])


def test_hazard_bands_keep_corridors_empty():
    # the corridors between class bands carry no samples apart from a thin
    # jitter fringe at the edges; their middle thirds stay empty
    spec = SyntheticSpec()
    lay = _band_layout(spec)
    for seed in range(4):
        ds = generate_dataset(SyntheticSpec(seed=seed))
        h = hazard_score(ds.features[:, 0], ds.features[:, 1], spec.hazard_slope)
        third1 = (lay.unc_lo - lay.op_top) / 3.0
        third2 = (lay.out_lo - lay.unc_hi) / 3.0
        in_c1 = (h > lay.op_top + third1) & (h < lay.unc_lo - third1)
        in_c2 = (h > lay.unc_hi + third2) & (h < lay.out_lo - third2)
        assert int(in_c1.sum()) == 0
        assert int(in_c2.sum()) == 0


def test_normalization_hand_values():
    assert normalize_features(167.6, 316.0) == pytest.approx((0.838, 0.632))
    assert normalize_features(85.0, 216.0) == pytest.approx((0.425, 0.432))
    # clamped at the maxima
    assert normalize_features(250.0, 600.0) == (1.0, 1.0)
    with pytest.raises(ValueError):
        normalize_features(-1.0, 10.0)
    with pytest.raises(ValueError):
        normalize_features(10.0, 10.0, max_wind_mph=0.0)


def test_dataset_round_trip(tmp_path):
    ds = generate_dataset(SyntheticSpec(seed=2))
    path = tmp_path / "data.csv"
    save_dataset(ds, str(path))
    back = load_dataset(str(path))
    assert np.array_equal(ds.features, back.features)
    assert np.array_equal(ds.labels, back.labels)


def test_dataset_file_rejects_foreign_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ValueError):
        load_dataset(str(path))


def test_point_segment_distance_hand_geometry():
    seg = (np.array([0.0, 0.0]), np.array([2.0, 0.0]))
    assert _point_segment_distance(np.array([1.0, 1.0]), *seg) == pytest.approx(1.0)
    # beyond an endpoint the nearest point is that endpoint
    assert _point_segment_distance(np.array([5.0, 1.0]), *seg) == pytest.approx(np.sqrt(10.0))
    # degenerate segment is a point
    assert _point_segment_distance(np.array([3.0, 4.0]), np.zeros(2), np.zeros(2)) == pytest.approx(5.0)


def test_track_distance_direction_independent():
    track = np.array([[0.0, 0.0], [100.0, 0.0], [100.0, 80.0]])
    fwd = HurricaneForecast(track, [3, 3, 3], [120.0, 120.0, 120.0])
    rev = HurricaneForecast(track[::-1].copy(), [3, 3, 3], [120.0, 120.0, 120.0])
    for p in [(10.0, 40.0), (150.0, 10.0), (-20.0, -5.0)]:
        assert track_distance_km(p, fwd) == pytest.approx(track_distance_km(p, rev))


def test_nearest_waypoint_ties_to_lowest_index():
    track = np.array([[0.0, 0.0], [10.0, 0.0]])
    fc = HurricaneForecast(track, [2, 2], [100.0, 100.0])
    assert nearest_waypoint((5.0, 0.0), fc) == 0
    assert nearest_waypoint((9.0, 1.0), fc) == 1


def test_component_features_attenuates_with_distance():
    track = np.array([[0.0, 0.0], [100.0, 0.0]])
    fc = HurricaneForecast(track, [4, 4], [140.0, 140.0])
    on_track = ComponentSite("a", (50.0, 0.0))
    offset = ComponentSite("b", (50.0, 200.0))
    wind_a, dist_a = component_features(on_track, fc)
    wind_b, dist_b = component_features(offset, fc)
    assert dist_a == pytest.approx(0.0)
    assert wind_a == pytest.approx(140.0)
    assert dist_b == pytest.approx(200.0)
    assert wind_b == pytest.approx(140.0 * (1.0 - 200.0 / 500.0))


def test_forecast_round_trip(tmp_path):
    track = np.array([[0.0, 0.0], [50.0, 20.0]])
    fc = HurricaneForecast(track, [2, 4], [100.0, 140.0])
    path = tmp_path / "forecast.json"
    save_forecast(fc, str(path))
    back = load_forecast(str(path))
    assert np.array_equal(back.track_km, fc.track_km)
    assert np.array_equal(back.categories, fc.categories)
    assert np.array_equal(back.eye_wind_mph, fc.eye_wind_mph)
