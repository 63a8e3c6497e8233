"""Record a decode session for the browser client's offline tests.

Drives the server-side message handler directly (no network), sending
hello plus one clean noise-free phrase, and captures every touch message
together with the reply the server produced.  The result is frozen as a
JSON fixture so the TypeScript test suite can replay the exact exchange
without a running Python server.

Run from the repository root with the ghosttype package installed:

    python3 webui/tools/record_fixture.py --out webui/test/fixtures/clean_sample.json

The default model is small and untrained but seeded, so the fixture is
reproducible byte for byte; pass --checkpoint to record against a trained
decoder instead.
"""

import argparse
import hashlib
import json
import pathlib

import numpy as np

from ghosttype.checkpoint import build_model, load_checkpoint
from ghosttype.model import ModelConfig
from ghosttype.service import Channel
from ghosttype.simulate import SimConfig, sample_mental_model, type_phrase

CADENCE_MS = 180  # keystroke spacing written into t_ms


def clean_touches(phrase: str, count: int) -> list[tuple[float, float]]:
    """Noise-free taps at the canonical key centers of one median user."""
    cfg = SimConfig(scale_std=(0.0, 0.0), offset_std_px=(0.0, 0.0),
                    tap_sigma_mm=0.0, drift_step_mm=0.0, rotation_range_deg=0.0,
                    pair_fraction=0.0, n_users=1, phrases_per_user=1)
    rng = np.random.default_rng(1)
    user = sample_mental_model(cfg, rng)
    sample = type_phrase(user, phrase, rng, cfg.screen)
    return [(p.x, p.y) for p in sample.touches[:count]]


def record(model, phrase: str, count: int) -> dict:
    channel = Channel(model)
    screen_mm = [555.0, 338.0]
    ready = channel.handle({"type": "hello", "screen_mm": screen_mm})
    assert ready["type"] == "ready", ready
    # the live server mints a random id; freeze a content-derived one so
    # regenerating the fixture is byte-identical
    ready["session_id"] = hashlib.md5(phrase.encode()).hexdigest()

    steps = []
    buffer: list[tuple[float, float]] = []
    for i, (x, y) in enumerate(clean_touches(phrase, count)):
        touch = {"type": "touch", "x": x, "y": y, "t_ms": i * CADENCE_MS}
        reply = channel.handle(touch)
        assert reply["type"] == "decoded", reply
        steps.append({"touch": touch, "reply": reply})
        buffer = (buffer + [(x, y)])[-model.config.window:]

    offline = model.decode_text(np.array(buffer))
    assert offline == steps[-1]["reply"]["text"]
    return {
        "phrase": phrase,
        "screen_mm": screen_mm,
        "ready": ready,
        "steps": steps,
        "offline_text": offline,
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=pathlib.Path, required=True)
    ap.add_argument("--phrase", default="the quick brown fox jumps")
    ap.add_argument("--touches", type=int, default=20)
    ap.add_argument("--checkpoint", default=None,
                    help="record against this trained model instead of the seeded default")
    args = ap.parse_args()

    if args.checkpoint:
        model, _ = load_checkpoint(args.checkpoint)
        recorded_with = {"checkpoint": str(args.checkpoint)}
    else:
        # seed 29 chosen because its replies revise shown text both while
        # the window is filling and after it is full, so replaying them
        # exercises every splice regime
        config = ModelConfig(variant="dnd", dec_stacks=1, clm_stacks=1,
                             units=8, window=8)
        model = build_model(config, seed=29)
        recorded_with = {"variant": config.variant, "stacks": 1, "units": config.units,
                         "window": config.window, "seed": 29, "trained": False}

    out = {"recorded_with": recorded_with, **record(model, args.phrase, args.touches)}
    args.out.write_text(json.dumps(out, indent=1) + "\n")
    print(f"{args.out}: {len(out['steps'])} touches, final text {out['offline_text']!r}")


if __name__ == "__main__":
    main()
