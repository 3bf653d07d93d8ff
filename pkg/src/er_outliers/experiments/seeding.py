"""Per-trial seeds derived from a master seed by a fixed hash."""

from __future__ import annotations

import hashlib


def trial_seed(master: int, i: int) -> int:
    digest = hashlib.blake2b(f"{master}:{i}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little") >> 1


def trial_seeds(master: int, count: int) -> list[int]:
    return [trial_seed(master, i) for i in range(count)]
