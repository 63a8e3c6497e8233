import numpy as np
import pytest

from ghosttype.chars import DICTIONARY, ENTER, SPACE
from ghosttype.data import ScreenSpec
from ghosttype.simulate import (
    ROW_KEYS,
    SimConfig,
    augment_offsets,
    base_template,
    bundled_corpus_path,
    generate_dataset,
    load_corpus,
    sample_mental_model,
    type_phrase,
)


def quiet_config(**kw):
    """All randomness off, unit scale: keys land exactly on the template."""
    defaults = dict(scale_mean=(1.0, 1.0), scale_std=(0.0, 0.0),
                    offset_std_px=(0.0, 0.0), tap_sigma_mm=0.0,
                    drift_step_mm=0.0, rotation_range_deg=0.0, pair_fraction=0.0)
    defaults.update(kw)
    return SimConfig(**defaults)


def test_template_covers_typeable_symbols():
    t = base_template(259.0, 125.9)
    assert set(t) == set(DICTIONARY.typeable)


def test_template_rows_increase_left_to_right():
    t = base_template(259.0, 125.9)
    for row in ROW_KEYS:
        xs = [t[ch][0] for ch in row]
        assert xs == sorted(xs)
        assert len(set(xs)) == len(xs)


def test_template_geometry():
    t = base_template(259.0, 125.9)
    pitch = 25.9
    # adjacent letters one pitch apart, rows a quarter height apart
    assert t["w"][0] - t["q"][0] == pytest.approx(pitch)
    assert t["a"][1] - t["q"][1] == pytest.approx(125.9 / 4)
    # home row staggered a quarter pitch, bottom row three quarters
    assert t["a"][0] - t["q"][0] == pytest.approx(0.25 * pitch)
    assert t["z"][0] - t["q"][0] == pytest.approx(0.75 * pitch)
    # space centered, enter right of the apostrophe on the home row
    assert t[SPACE][0] == pytest.approx(0.0)
    assert t[ENTER][1] == t["a"][1]
    assert t[ENTER][0] > t["'"][0]
    # centered template: mean of the nominal box corners is the origin
    assert t["q"][0] < 0 < t["p"][0]


def test_quiet_model_equals_centered_template():
    cfg = quiet_config()
    m = sample_mental_model(cfg, np.random.default_rng(0))
    t = base_template(259.0, 125.9)
    cx, cy = cfg.screen.width_mm / 2, cfg.screen.height_mm / 2
    for ch, (x, y) in t.items():
        assert m.key_centers[ch] == pytest.approx((x + cx, y + cy))
    assert m.offset_mm.tolist() == [0.0, 0.0]
    assert (m.scale_h, m.scale_v, m.rotation_deg) == (1.0, 1.0, 0.0)


def test_scale_h_doubles_horizontal_distances_only():
    rng = np.random.default_rng(0)
    base = sample_mental_model(quiet_config(), rng)
    wide = sample_mental_model(quiet_config(scale_mean=(2.0, 1.0)), rng)

    def dist_x(m, a, b):
        return m.key_centers[b][0] - m.key_centers[a][0]

    assert dist_x(wide, "a", "l") == pytest.approx(2 * dist_x(base, "a", "l"))
    assert wide.key_centers["q"][1] == pytest.approx(base.key_centers["q"][1])


def test_scale_truncation_and_rejection():
    cfg = quiet_config()
    rng = np.random.default_rng(1)
    for _ in range(200):
        m = sample_mental_model(SimConfig(seed=0), rng)
        assert m.scale_h > 0.5 and m.scale_v > 0.5
    with pytest.raises(ValueError):
        quiet_config(scale_mean=(0.4, 1.0))


def test_space_p_distance_mean_within_5pct():
    """Monte-Carlo mean of the space-'p' distance vs the closed form."""
    cfg = SimConfig(seed=0)
    t = base_template(*cfg.keyboard_mm)
    ref = float(np.hypot(t["p"][0] - t[SPACE][0], t["p"][1] - t[SPACE][1]))
    rng = np.random.default_rng(123)
    dists = []
    for _ in range(10_000):
        m = sample_mental_model(cfg, rng)
        (px, py), (sx, sy) = m.key_centers["p"], m.key_centers[SPACE]
        dists.append(np.hypot(px - sx, py - sy))
    assert abs(np.mean(dists) - ref) / ref < 0.05


def test_noise_free_typing_is_deterministic():
    cfg = quiet_config()
    rng = np.random.default_rng(0)
    m = sample_mental_model(cfg, rng)
    s1 = type_phrase(m, "hello world.", rng, cfg.screen)
    s2 = type_phrase(m, "hello world.", rng, cfg.screen)
    assert s1.touches == s2.touches
    # touches are exactly the normalized transformed centers
    for ch, p in zip(s1.phrase, s1.touches):
        cx, cy = m.key_centers[ch]
        assert (p.x, p.y) == pytest.approx((cx / cfg.screen.width_mm,
                                            cy / cfg.screen.height_mm))


def test_typing_errors():
    cfg = quiet_config()
    m = sample_mental_model(cfg, np.random.default_rng(0))
    with pytest.raises(ValueError):
        type_phrase(m, "", np.random.default_rng(0))
    with pytest.raises(ValueError, match="key center"):
        type_phrase(m, "a\x00b", np.random.default_rng(0))


def test_tap_noise_within_4mm_tail_bound():
    """With sigma = 1 mm, both taps of "aa" stay within 4 mm of 'a' (4-sigma)."""
    cfg = quiet_config(tap_sigma_mm=1.0)
    rng = np.random.default_rng(7)
    m = sample_mental_model(cfg, rng)
    ax, ay = m.key_centers["a"]
    far = total = 0
    for _ in range(2000):
        s = type_phrase(m, "aa", rng, cfg.screen)
        assert s.touches[0] != s.touches[1]
        for p in s.touches:
            dx = p.x * cfg.screen.width_mm - ax
            dy = p.y * cfg.screen.height_mm - ay
            total += 1
            if np.hypot(dx, dy) > 4.0:
                far += 1
    assert far / total < 1e-4 * 10  # generous margin over the 4-sigma bound


def test_drift_grows_with_phrase_count():
    cfg = SimConfig(seed=0)
    rng = np.random.default_rng(99)
    mag_10, mag_150 = [], []
    for _ in range(100):
        m = sample_mental_model(cfg, rng)
        m.offset_mm = np.zeros(2)
        for i in range(150):
            type_phrase(m, "ab", rng, cfg.screen)
            if i == 9:
                mag_10.append(float(np.hypot(*m.offset_mm)))
        mag_150.append(float(np.hypot(*m.offset_mm)))
    assert np.mean(mag_150) > np.mean(mag_10)


def test_scale_recovery_via_space_p_distance():
    """Estimating scale from generated touches recovers scale_h within 2%."""
    cfg = quiet_config(scale_mean=(1.3, 1.0))
    rng = np.random.default_rng(5)
    m = sample_mental_model(cfg, rng)
    t = base_template(*cfg.keyboard_mm)
    s = type_phrase(m, "p" + SPACE, rng, cfg.screen)
    px = s.touches[0].x * cfg.screen.width_mm
    sx = s.touches[1].x * cfg.screen.width_mm
    est = (px - sx) / (t["p"][0] - t[SPACE][0])
    assert abs(est - 1.3) / 1.3 < 0.02


def test_augment_counts_and_translation():
    cfg = quiet_config(n_users=1, phrases_per_user=4)
    ds = generate_dataset(cfg, ["abc def.", "ghi jkl."])
    out = augment_offsets(ds, copies=5, max_offset_px=(50, 30),
                          rng=np.random.default_rng(0))
    assert len(out) == 6 * len(ds)
    assert out.samples[: len(ds)] == ds.samples  # originals preserved
    copy = out.samples[len(ds)]
    orig = ds.samples[0]
    assert copy.phrase == orig.phrase
    dx = copy.touches[0].x - orig.touches[0].x
    dy = copy.touches[0].y - orig.touches[0].y
    assert abs(dx) <= 50 / 1920 + 1e-12 and abs(dy) <= 30 / 1080 + 1e-12
    for a, b in zip(orig.touches, copy.touches):
        assert b.x - a.x == pytest.approx(dx, abs=1e-12)
        assert b.y - a.y == pytest.approx(dy, abs=1e-12)


def test_augment_zero_offset_duplicates():
    cfg = quiet_config(n_users=1, phrases_per_user=2)
    ds = generate_dataset(cfg, ["abc"])
    out = augment_offsets(ds, copies=2, max_offset_px=(0, 0),
                          rng=np.random.default_rng(0))
    assert all(s.touches == ds.samples[i % len(ds)].touches
               for i, s in enumerate(out.samples))


def test_generated_samples_valid_and_seeded():
    cfg = SimConfig(n_users=3, phrases_per_user=4, seed=42)
    phrases = ["one day.", "it's fine.", "more words here."]
    a = generate_dataset(cfg, phrases)
    b = generate_dataset(cfg, phrases)
    assert a == b
    assert len(a) == 12
    assert a.users() == ["u00", "u01", "u02"]
    for s in a.samples:
        assert len(s.phrase) == len(s.touches)
        assert all(0 <= p.x <= 1 and 0 <= p.y <= 1 for p in s.touches)


def test_pair_fraction_produces_enter():
    cfg = SimConfig(n_users=2, phrases_per_user=30, pair_fraction=0.5, seed=1)
    ds = generate_dataset(cfg, ["abc.", "def."])
    joined = [s for s in ds.samples if ENTER in s.phrase]
    assert joined
    assert all(s.phrase.count(ENTER) == 1 for s in joined)


def test_bundled_corpus_is_large_and_clean():
    phrases = load_corpus(bundled_corpus_path())
    assert len(phrases) >= 500
    assert len(set(phrases)) == len(phrases)
    text = "\n".join(phrases)
    for ch in DICTIONARY.typeable:
        if ch == ENTER:
            continue
        assert ch in text, f"corpus never uses {ch!r}"
    assert max(len(p) for p in phrases) <= 64


def test_sim_config_validation():
    with pytest.raises(ValueError):
        SimConfig(n_users=0)
    with pytest.raises(ValueError):
        SimConfig(tap_sigma_mm=-1)
    with pytest.raises(ValueError):
        SimConfig(pair_fraction=1.5)
