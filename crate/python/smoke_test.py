"""Smoke test for the forage Python extension.

Build and install first:  pip install --no-build-isolation -e crates/py
Then run:                 python python/smoke_test.py
"""

import json
import math

import forage


def main() -> None:
    m = forage.Mechanics(math.pi / 3)
    assert m.reward_at(0.4) == -2
    hue, sat = m.color_at(0.0)
    assert hue == 0.0 and abs(sat - 0.25) < 1e-12

    light = forage.LightCycle()
    assert light.level(0.0) == 1.0
    assert abs(light.level(32.5) - 0.5) < 1e-12
    assert not light.is_visible(45.0)

    table = forage.ValueTable()
    assert table.update(0.5, 0.5, 8.0) == 4.0
    assert table.update(0.5, 0.5, 8.0) == 2.0
    assert table.query(0.5, 0.5) == 6.0

    policy = forage.CuePolicy()
    assert policy.p_cue(0) == 0.5
    policy.decide(5.0, 2, 0)
    policy.resolve(2, 10)
    assert policy.pending == 0

    config = json.dumps({"condition": "bandit", "seed": 7, "trials_per_block": 1, "trial_duration": 60})
    log, summary = forage.run_block(config)
    assert log.splitlines()[0].startswith('{"kind":"header"')
    assert forage.aggregate_scores(log) == summary["total"]
    positions = forage.aggregate_by_position(log)
    assert sum(positions.values()) == summary["final_scores"][0]
    assert forage.replay(log) == (True, None)

    try:
        forage.ValueTable().query(1.0, 0.5)
    except ValueError:
        pass
    else:
        raise AssertionError("hue 1.0 must be rejected")

    print("forage smoke test: ok", summary["total"])


if __name__ == "__main__":
    main()
