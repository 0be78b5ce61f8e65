"""Shared brute-force oracles and generators for the test suite.

These restate the scored behaviors independently of the implementations they
check: metrics by prefix enumeration, the ranked merge as a last-position-up
walk, and a deterministic corpus of mangled ranked-list responses.
"""

from __future__ import annotations

import random

from cvemap.types import NONE_LABEL, PAD_LABEL


# ---------------------------------------------------------------------------
# ranked metric oracles
# ---------------------------------------------------------------------------


def oracle_hits(slots, truth, k):
    count = 0
    for slot in list(slots)[:k]:
        if slot == PAD_LABEL:
            continue
        if slot == NONE_LABEL:
            if set(truth) == {NONE_LABEL}:
                count += 1
        elif slot in truth:
            count += 1
    return count


def oracle_precision(slots, truth, k):
    return oracle_hits(slots, truth, k) / k


def oracle_recall(slots, truth, k):
    return oracle_hits(slots, truth, k) / len(truth)


def oracle_average_precision(slots, truth):
    slots = list(slots)
    total = 0.0
    for i in range(1, len(slots) + 1):
        last = slots[i - 1]
        is_hit = last != PAD_LABEL and (
            last in truth or (last == NONE_LABEL and set(truth) == {NONE_LABEL})
        )
        if is_hit:
            total += oracle_precision(slots, truth, i)
    return total / len(truth)


def oracle_micro(predictions, truths):
    tp = sum(len(set(p) & set(t)) for p, t in zip(predictions, truths))
    fp = sum(len(set(p) - set(t)) for p, t in zip(predictions, truths))
    fn = sum(len(set(t) - set(p)) for p, t in zip(predictions, truths))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


# ---------------------------------------------------------------------------
# merge-rule simulation
# ---------------------------------------------------------------------------


def simulate_merge(icl_slots, mm):
    """Walk from the last position upward, overwriting non-NONE slots with
    novel entries while keeping the novel order top-to-bottom."""
    existing = {s for s in icl_slots if s not in (NONE_LABEL, PAD_LABEL)}
    novel = [t for t in mm if t not in existing]
    chosen = []
    position = len(icl_slots) - 1
    while position >= 0 and len(chosen) < len(novel):
        if icl_slots[position] != NONE_LABEL:
            chosen.append(position)
        position -= 1
    out = list(icl_slots)
    for entry, slot in zip(novel, sorted(chosen)):
        out[slot] = entry
    return out


def random_merge_pair(rng: random.Random):
    pool = [f"T1{n:03d}" for n in range(100, 200)]
    technique_count = rng.randint(0, 10)
    picked = rng.sample(pool, technique_count)
    slots = list(picked)
    if len(slots) < 10 and rng.random() < 0.5:
        slots.insert(rng.randint(0, len(slots)), NONE_LABEL)
    while len(slots) < 10:
        slots.append(PAD_LABEL)
    slots = slots[:10]
    mm_pool = [t for t in pool if t not in picked] + picked
    mm = []
    for t in rng.sample(mm_pool, rng.randint(0, 12)):
        if t not in mm:
            mm.append(t)
    return slots, mm


# ---------------------------------------------------------------------------
# ranked-response perturbations
# ---------------------------------------------------------------------------

PERTURBATION_SEED = 20240601


def perturbed_responses(count=100):
    """Deterministic corpus of mangled ranked-list responses: case changes,
    prose padding, sub-technique IDs, duplicates, short and long lists, and
    listless rejects."""
    rng = random.Random(PERTURBATION_SEED)
    pool = [f"T1{n:03d}" for n in range(1, 600)]
    samples = []
    for index in range(count):
        kind = index % 10
        ids = rng.sample(pool, 10)
        if kind == 0:
            body = ", ".join(f"'{t}'" for t in ids)
            samples.append(f"[{body}]")
        elif kind == 1:
            body = ", ".join(f"'{t.lower()}'" for t in ids)
            samples.append(f"Sure thing!\n[{body}]\nHope that helps.")
        elif kind == 2:
            subbed = [f"{t}.00{rng.randint(1, 9)}" for t in ids[:4]] + ids[4:]
            body = ", ".join(f"'{t}'" for t in subbed)
            samples.append(f"[{body}]")
        elif kind == 3:
            dup = ids[:5] + ids[:5]
            body = ", ".join(f"'{t}'" for t in dup)
            samples.append(f"[{body}]")
        elif kind == 4:
            body = ", ".join(f"'{t}'" for t in ids[:3])
            samples.append(f"[{body}, None]")
        elif kind == 5:
            samples.append("[" + ", ".join(f'"{t}"' for t in ids) + "]")
        elif kind == 6:
            samples.append("[None, 'none', " + ", ".join(f"'{t}'" for t in ids[:8]) + "]")
        elif kind == 7:
            samples.append("no list here at all")
        elif kind == 8:
            samples.append("[]")
        else:
            body = ", ".join(f"'{t}'" for t in ids[:12])
            samples.append(f"ranked: [{body}] trailing text [ignored]")
    return samples
