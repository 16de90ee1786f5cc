"""Late ensembling: voting over several models' prediction sets.

Spans are grouped into containment-equivalence classes over normalized token
sequences (a span contained in another is the same vote; chains collapse by
transitive closure). Classes backed by more than one model survive, each
represented by its longest member; when every class has a single vote, all of
them survive.
"""

from __future__ import annotations

from maqa.core import PredictionSet, normalize


def _contains(outer: tuple[str, ...], inner: tuple[str, ...]) -> bool:
    if len(inner) > len(outer):
        return False
    return any(
        outer[i : i + len(inner)] == inner for i in range(len(outer) - len(inner) + 1)
    )


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # deterministic root choice keeps the partition order-independent
            if ra < rb:
                self.parent[rb] = ra
            else:
                self.parent[ra] = rb


def vote(sets) -> PredictionSet:
    """Ensemble several prediction sets for one instance by containment voting."""
    sets = list(sets)
    if len(sets) < 2:
        raise ValueError("ensembling needs at least two prediction sets")
    instance_id = sets[0].instance_id
    if any(s.instance_id != instance_id for s in sets):
        raise ValueError("prediction sets disagree on instance_id")

    # distinct normalized token tuples, remembering originals and which models voted
    originals: dict[tuple[str, ...], set[str]] = {}
    voters: dict[tuple[str, ...], set[int]] = {}
    for model_idx, pset in enumerate(sets):
        for text in pset.spans:
            key = tuple(normalize(text).split())
            if not key:
                continue
            originals.setdefault(key, set()).add(text)
            voters.setdefault(key, set()).add(model_idx)

    keys = sorted(originals)
    uf = _UnionFind(keys)
    for i, a in enumerate(keys):
        for b in keys[i + 1 :]:
            if _contains(a, b) or _contains(b, a):
                uf.union(a, b)

    classes: dict[tuple[str, ...], list[tuple[str, ...]]] = {}
    for key in keys:
        classes.setdefault(uf.find(key), []).append(key)

    results = []
    for members in classes.values():
        votes = set()
        for member in members:
            votes |= voters[member]
        longest = max(members, key=lambda m: (len(m), len(" ".join(m)), m))
        surface = min(originals[longest])
        results.append((len(votes), longest, surface))

    if any(n >= 2 for n, _, _ in results):
        results = [r for r in results if r[0] >= 2]
    winners = sorted(surface for _, _, surface in results)
    return PredictionSet(instance_id, tuple(winners), producer="ensemble")


def vote_corpus(prediction_maps) -> dict[str, PredictionSet]:
    """Ensemble per-instance across several {instance_id: PredictionSet} maps."""
    ids: set[str] = set()
    for m in prediction_maps:
        ids |= set(m)
    out = {}
    for iid in sorted(ids):
        present = [m[iid] for m in prediction_maps if iid in m]
        missing = len(prediction_maps) - len(present)
        # a model with no prediction for the instance contributes an empty set
        present += [PredictionSet(iid, ())] * missing
        out[iid] = vote(present)
    return out
