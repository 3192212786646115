"""Generation protocols: which chain each source image receives.

round_robin     one (operator, level) per image, cycling operators in the
                given order with levels innermost
cartesian       every image x operator x level
chain_factorial every severity combination of a fixed operator sequence
random_chains   k operators from k distinct canonical groups, seeded
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass

from imdeg.degradations import (
    DEFAULT_SEED,
    LEVELS,
    ChainSpec,
    DegradationSpec,
    OperatorDescriptor,
    get_operator,
)
from imdeg.image import RngStream
from imdeg.taxonomy import lookup

PROTOCOLS = ("round_robin", "cartesian", "chain_factorial", "random_chains")


@dataclass(frozen=True)
class Assignment:
    image_id: str
    chain: ChainSpec


@dataclass(frozen=True)
class GenerationPlan:
    protocol: str
    assignments: tuple
    seed: int
    config_digest: str

    def __len__(self):
        return len(self.assignments)

    def __iter__(self):
        return iter(self.assignments)


def _keys(operators):
    out = []
    for op in operators:
        if isinstance(op, OperatorDescriptor):
            out.append((op.backend, op.key))
        elif isinstance(op, str):
            b, _, t = op.partition("/")
            d = get_operator(b, t)
            out.append((d.backend, d.key))
        else:
            d = get_operator(*op)
            out.append((d.backend, d.key))
    if not out:
        raise ValueError("need at least one operator")
    return out


def _ids(images):
    ids = [str(i) for i in images]
    if not ids:
        raise ValueError("need at least one image")
    if len(set(ids)) != len(ids):
        raise ValueError("image ids must be unique")
    return ids


def _levels(levels):
    lv = list(range(1, LEVELS + 1)) if levels is None else [int(v) for v in levels]
    if not lv or any(not 1 <= v <= LEVELS for v in lv):
        raise ValueError(f"levels must be a non-empty subset of 1..{LEVELS}")
    return lv


def _finish(protocol, assignments, seed, extra=None):
    doc = {
        "protocol": protocol,
        "seed": seed,
        "extra": extra or {},
        "assignments": [[a.image_id, [s.as_dict() for s in a.chain]] for a in assignments],
    }
    digest = hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()
    return GenerationPlan(protocol, tuple(assignments), int(seed), digest)


def _single(image_id, key, level, seed):
    return Assignment(image_id, ChainSpec((DegradationSpec(key[0], key[1], level, seed),)))


def plan_round_robin(images, operators, levels=None, seed=DEFAULT_SEED):
    ids, keys, lv = _ids(images), _keys(operators), _levels(levels)
    combos = [(k, l) for k in keys for l in lv]
    out = [_single(iid, *combos[i % len(combos)], seed) for i, iid in enumerate(ids)]
    return _finish("round_robin", out, seed)


def plan_cartesian(images, operators, levels=None, seed=DEFAULT_SEED):
    ids, keys, lv = _ids(images), _keys(operators), _levels(levels)
    out = [_single(iid, k, l, seed) for iid in ids for k in keys for l in lv]
    return _finish("cartesian", out, seed)


def plan_chain_factorial(images, template, levels=None, seed=DEFAULT_SEED):
    """Full factorial over slot severities; ``levels`` may be one list or one per slot."""
    ids, keys = _ids(images), _keys(template)
    if levels is None or all(isinstance(v, int) for v in levels):
        per_slot = [_levels(levels)] * len(keys)
    else:
        per_slot = [_levels(v) for v in levels]
        if len(per_slot) != len(keys):
            raise ValueError("one level list per template slot expected")
    out = []
    for iid in ids:
        for combo in itertools.product(*per_slot):
            steps = tuple(DegradationSpec(k[0], k[1], l, seed) for k, l in zip(keys, combo))
            out.append(Assignment(iid, ChainSpec(steps)))
    return _finish("chain_factorial", out, seed, {"template": [f"{b}/{t}" for b, t in keys]})


def group_pool(operators):
    """Canonical group id -> operator keys, both in first-seen order."""
    pool = {}
    for key in _keys(operators):
        pool.setdefault(lookup(*key).group, []).append(key)
    return pool


def plan_random_chains(images, operators, k, seed=DEFAULT_SEED, levels=None):
    """Per image: ``k`` distinct groups in random order, one operator and level each."""
    ids, lv = _ids(images), _levels(levels)
    pool = group_pool(operators)
    groups = list(pool)
    if not 1 <= int(k) <= len(groups):
        raise ValueError(f"chain length {k} needs 1..{len(groups)} distinct groups with operators")
    out = []
    for iid in ids:
        rng = RngStream(seed, f"plan:{iid}").generator()
        picked = rng.choice(len(groups), size=int(k), replace=False)
        steps = []
        for g in picked:
            cands = pool[groups[int(g)]]
            key = cands[int(rng.integers(len(cands)))]
            steps.append(DegradationSpec(key[0], key[1], lv[int(rng.integers(len(lv)))], seed))
        out.append(Assignment(iid, ChainSpec(tuple(steps))))
    return _finish("random_chains", out, seed, {"k": int(k)})


def make_plan(protocol, images, operators, *, seed=DEFAULT_SEED, k=2, levels=None):
    if protocol == "round_robin":
        return plan_round_robin(images, operators, levels, seed)
    if protocol == "cartesian":
        return plan_cartesian(images, operators, levels, seed)
    if protocol == "chain_factorial":
        return plan_chain_factorial(images, operators, levels, seed)
    if protocol == "random_chains":
        return plan_random_chains(images, operators, k, seed, levels)
    raise ValueError(f"unknown protocol {protocol!r} (choose from {', '.join(PROTOCOLS)})")
