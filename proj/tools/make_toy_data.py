#!/usr/bin/env python3
# Copyright 2026 The cascade-hybrid Authors. All rights reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes the small bundled rating/genre files under data/.

150 users rate 40% of 120 items on a 5-point scale; exactly 7% of all
user-item pairs carry a 5. Output is fully determined by the seed.
"""

import argparse
import pathlib

import numpy as np

GENRES = ["action", "comedy", "drama", "horror", "romance", "scifi", "thriller", "unknown"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    n_users, n_items, rank = 150, 120, 4
    item_ids = 1000 + 7 * np.arange(n_items)
    user_ids = 1 + 3 * np.arange(n_users)

    genres = np.zeros((n_items, len(GENRES)), dtype=bool)
    for a in range(n_items):
        k = rng.integers(1, 4)
        genres[a, rng.choice(len(GENRES), size=k, replace=False)] = True

    q = np.abs(rng.normal(size=(n_items, rank)))
    p = rng.uniform(size=(n_users, rank)) ** 2
    taste = rng.uniform(size=(n_users, len(GENRES))) ** 3
    score = q @ p.T + 1.5 * (genres.astype(float) @ taste.T) + 0.3 * rng.normal(size=(n_items, n_users))

    rated = np.zeros((n_users, n_items), dtype=bool)
    for u in range(n_users):
        rated[u, rng.choice(n_items, size=int(0.4 * n_items), replace=False)] = True

    n_pos = round(0.07 * n_users * n_items)
    cand = [(score[a, u], u, a) for u in range(n_users) for a in range(n_items) if rated[u, a]]
    cand.sort(reverse=True)
    ratings = {}
    for rank_i, (_, u, a) in enumerate(cand):
        if rank_i < n_pos:
            ratings[(u, a)] = 5
        else:
            ratings[(u, a)] = int(rng.integers(1, 5))

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "toy_ratings.tsv", "w") as f:
        f.write("user_id\titem_id\trating\n")
        for (u, a), r in sorted(ratings.items()):
            f.write(f"{user_ids[u]}\t{item_ids[a]}\t{r}\n")
    with open(out / "toy_topics.csv", "w") as f:
        f.write("item_id,topic\n")
        for a in range(n_items):
            for j in np.flatnonzero(genres[a]):
                f.write(f"{item_ids[a]},{GENRES[j]}\n")


if __name__ == "__main__":
    main()
