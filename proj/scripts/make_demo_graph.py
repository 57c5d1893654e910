#!/usr/bin/env python3
"""Generates data/collab198.edges, the bundled 198-node demo network.

Collaboration-style layout with overlapping band cliques, clone-pair
session stars with shared followings, and locally popular players:

  - regulars: members of ~3 bands (bands = cliques, ring-overlapped so
    threshold dynamics can percolate around the ring)
  - session stars: 3 pairs; both stars of a pair play in the same 5 bands
    and share a private groupie block -> top-degree near-clones, so a
    degree ranking wastes budget on redundant picks
  - groupies: degree-2 nodes following exactly one star pair
  - local heroes: two-band players carrying a small private fan base, a
    little more valuable than their degree suggests
  - fans: degree-1 nodes attached to one hero
"""
import itertools
import random
import sys

N = 198
TARGET_EDGES = 2742


def build(seed, n_bands=22, band_size=14, ring_overlap=3,
          star_pairs=3, bands_per_star=5, block_sizes=(12, 10, 8),
          n_fan_centers=5, fans_per_center=5, hero_bands=2):
    rng = random.Random(seed)
    edges = set()

    def add(u, v):
        if u != v:
            edges.add((min(u, v), max(u, v)))

    n_stars = 2 * star_pairs
    n_groupies = sum(block_sizes)
    n_fans = n_fan_centers * fans_per_center
    n_musicians = N - n_groupies - n_fans
    stars = list(range(n_stars))
    centers = list(range(n_stars, n_stars + n_fan_centers))
    regulars = list(range(n_stars + n_fan_centers, n_musicians))

    # Regulars fill bands round-robin; ring overlap shares the tail of
    # band i with band i+1.
    core = band_size - ring_overlap
    bands = []
    idx = 0
    for b in range(n_bands):
        members = []
        for _ in range(core):
            members.append(regulars[idx % len(regulars)])
            idx += 1
        bands.append(members)
    for b in range(n_bands):
        nxt = bands[(b + 1) % n_bands]
        bands[b] = bands[b] + nxt[:ring_overlap]

    # Star pair p: both stars join the same bands_per_star consecutive
    # bands and share a groupie block.
    groupie_id = n_musicians
    for p in range(star_pairs):
        a, b = stars[2 * p], stars[2 * p + 1]
        for j in range(bands_per_star):
            bands[(p * bands_per_star + j) % n_bands] += [a, b]
        for _ in range(block_sizes[p]):
            add(a, groupie_id)
            add(b, groupie_id)
            groupie_id += 1

    # Each hero joins hero_bands bands (spread around the ring) and gets a
    # private fan base worth more than its degree suggests.
    for i, c in enumerate(centers):
        base = (i * n_bands) // n_fan_centers
        for j in range(hero_bands):
            bands[(base + j) % n_bands].append(c)

    for members in bands:
        for u, v in itertools.combinations(set(members), 2):
            add(u, v)

    fan_id = groupie_id
    for c in centers:
        for _ in range(fans_per_center):
            add(c, fan_id)
            fan_id += 1
    assert fan_id == N, f"ids end at {fan_id}"

    # Hit the exact edge target; only regular-regular edges are
    # expendable, stars, heroes, fans and groupies keep theirs.
    reg0 = n_stars + n_fan_centers
    trim = sorted(p for p in edges if p[0] >= reg0 and p[1] < n_musicians)
    rng.shuffle(trim)
    i = 0
    while len(edges) > TARGET_EDGES and i < len(trim):
        edges.discard(trim[i])
        i += 1
    filler = [(u, v) for u in range(reg0, n_musicians)
              for v in range(reg0, n_musicians)
              if u < v and (u, v) not in edges]
    rng.shuffle(filler)
    i = 0
    while len(edges) < TARGET_EDGES:
        edges.add(filler[i])
        i += 1
    assert len(edges) == TARGET_EDGES

    # Connectivity.
    adj = {u: set() for u in range(N)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    seen, stack = {0}, [0]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    assert len(seen) == N, f"disconnected: {len(seen)}/{N}"
    return sorted(edges), centers


def main():
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 1
    out = sys.argv[2] if len(sys.argv) > 2 else "data/collab198.edges"
    edges, centers = build(seed)
    deg = {}
    for u, v in edges:
        deg[u] = deg.get(u, 0) + 1
        deg[v] = deg.get(v, 0) + 1
    top = sorted(deg.items(), key=lambda kv: (-kv[1], kv[0]))[:14]
    print(f"edges={len(edges)}", file=sys.stderr)
    print(f"top degree: {top}", file=sys.stderr)
    print(f"heroes: {sorted((c, deg[c]) for c in centers)}", file=sys.stderr)
    with open(out, "w") as f:
        f.write("# collaboration-style demo network: 198 nodes, 2742 edges\n")
        for u, v in edges:
            f.write(f"{u} {v}\n")


if __name__ == "__main__":
    main()
