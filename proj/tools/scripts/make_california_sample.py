#!/usr/bin/env python3
"""Writes a synthetic 500-row CSV with the California housing column layout.

The values are drawn from simple parametric laws around a few coastal
clusters; they only need to look plausible and exercise the ingestion path.
"""
import argparse
import csv
import math
import random

CLUSTERS = [  # (lat, lon, spread, price level)
    (34.05, -118.25, 0.6, 2.6),
    (37.77, -122.42, 0.5, 3.4),
    (32.72, -117.16, 0.4, 2.4),
    (38.58, -121.49, 0.5, 1.6),
    (36.74, -119.79, 0.7, 1.1),
]


def row(rng):
    lat, lon, spread, level = rng.choice(CLUSTERS)
    lat = min(41.95, max(32.54, rng.gauss(lat, spread)))
    lon = min(-114.31, max(-124.35, rng.gauss(lon, spread)))
    inc = max(0.5, min(15.0, rng.lognormvariate(math.log(3.5), 0.45)))
    age = rng.randint(1, 52)
    rooms = max(1.5, rng.gauss(5.3, 1.2))
    bedrms = max(0.6, rng.gauss(1.07, 0.12))
    pop = max(10, int(rng.lognormvariate(math.log(1200), 0.6)))
    occup = max(1.0, rng.gauss(2.9, 0.6))
    val = 0.35 * inc + 0.5 * level + 0.004 * age + rng.gauss(0.0, 0.35)
    val = max(0.15, min(5.00001, val))
    return [f"{inc:.4f}", f"{age}", f"{rooms:.6f}", f"{bedrms:.6f}", f"{pop}",
            f"{occup:.6f}", f"{lat:.2f}", f"{lon:.2f}", f"{val:.5f}"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", type=int, default=500)
    ap.add_argument("--seed", type=int, default=20640)
    ap.add_argument("--out", default="data/california_sample.csv")
    args = ap.parse_args()
    rng = random.Random(args.seed)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["MedInc", "HouseAge", "AveRooms", "AveBedrms", "Population",
                    "AveOccup", "Latitude", "Longitude", "MedHouseVal"])
        for _ in range(args.rows):
            w.writerow(row(rng))


if __name__ == "__main__":
    main()
