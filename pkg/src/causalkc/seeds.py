"""Deterministic seed fan-out: one top-level seed, derived per stage/label."""

from __future__ import annotations

import hashlib


def derive_seed(seed: int, label: str) -> int:
    """Stable 63-bit sub-seed for a named stage of a seeded run."""
    digest = hashlib.sha256(f"{seed}/{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1
