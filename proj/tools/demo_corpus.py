#!/usr/bin/env python3
"""Writes a small synthetic CSV data lake for trying the CLI."""

import argparse
import csv
import random
from pathlib import Path

TOPICS = {
    "city": ["paris", "berlin", "madrid", "rome", "lisbon", "vienna", "prague", "oslo", "dublin", "athens",
             "warsaw", "budapest", "helsinki", "brussels", "zurich", "munich", "milan", "porto", "lyon", "krakow"],
    "product": ["laptop", "phone", "tablet", "monitor", "keyboard", "mouse", "printer", "router", "camera",
                "speaker", "headset", "charger", "cable", "dock", "webcam", "scanner", "drive", "watch"],
    "species": ["oak", "pine", "maple", "birch", "cedar", "willow", "ash", "elm", "beech", "spruce", "fir",
                "alder", "poplar", "larch", "yew", "holly"],
}
NUMERIC = {
    "price": lambda r: f"{r.uniform(5, 500):.2f}",
    "count": lambda r: str(r.randint(0, 1000)),
    "year": lambda r: str(r.randint(1990, 2024)),
    "height": lambda r: f"{r.gauss(20, 5):.1f}",
}


def make_table(rng: random.Random, index: int, rows: int) -> tuple[list[str], list[list[str]], str]:
    topic = rng.choice(sorted(TOPICS))
    numeric = rng.sample(sorted(NUMERIC), k=rng.randint(1, 3))
    header = ["id", topic] + numeric
    body = []
    for r in range(rows):
        body.append([f"t{index}-{r}", rng.choice(TOPICS[topic])] + [NUMERIC[n](rng) for n in numeric])
    return header, body, f"{topic} records with {', '.join(numeric)}"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out", type=Path)
    parser.add_argument("--tables", type=int, default=20)
    parser.add_argument("--rows", type=int, default=120)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    rng = random.Random(args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    for i in range(args.tables):
        header, body, description = make_table(rng, i, args.rows)
        with open(args.out / f"table{i:03d}.csv", "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(header)
            writer.writerows(body)
        (args.out / f"table{i:03d}.desc.txt").write_text(description + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
