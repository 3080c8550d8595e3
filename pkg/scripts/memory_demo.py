#!/usr/bin/env python3
"""Store a batch of feature scenes and query them with and without a
legality constraint.

Usage: python scripts/memory_demo.py [memory_dir]
"""

from __future__ import annotations

import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from cpl.memory import cross_reference, load_memory_dir, predict, save_scene  # noqa: E402

SCENES = {
    "breakfast": ["Egg", "Heat", "Pot", "Water"],
    "tea": ["Heat", "Pot", "Tap", "Water"],
    "soup": ["Heat", "Pot", "Salt", "Water"],
    "pasta": ["Heat", "Pot", "Salt", "Water", "Pasta"],
}


def main() -> int:
    if len(sys.argv) > 1:
        directory = Path(sys.argv[1])
        directory.mkdir(parents=True, exist_ok=True)
    else:
        directory = Path(tempfile.mkdtemp(prefix="cpl-memory-"))
    for scene_id, features in SCENES.items():
        save_scene(directory, scene_id, features)
    store = load_memory_dir(directory)
    print(f"stored {len(store)} scenes in {directory}")

    inputs = ["Pot", "Water"]
    votes = cross_reference(store, inputs)
    print(f"votes for input {inputs}:")
    for feature in sorted(votes, key=lambda f: (-votes[f], f)):
        print(f"  {feature}: {votes[feature]}")

    unconstrained = predict(store, inputs, k=3)
    print("top predictions:")
    for item in unconstrained.ranked:
        print(f"  {item.feature} ({item.votes} votes)")

    legal = {"Egg", "Pasta"}
    constrained = predict(store, inputs, legal=legal, k=3)
    print(f"predictions constrained to {sorted(legal)}:")
    for item in constrained.ranked:
        print(f"  {item.feature} ({item.votes} votes)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
