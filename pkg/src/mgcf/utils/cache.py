"""In-process cache of stationary trajectories keyed by configuration."""

from __future__ import annotations

import hashlib
import logging
from typing import Any, Dict, Optional

from ..config import VERSION

logger = logging.getLogger(__name__)


def config_fingerprint(config: Any, initial: Any = None) -> str:
    """Stable hash of a frozen configuration (and optional initial heights)."""
    digest = hashlib.sha256(repr(config).encode("utf-8"))
    if initial is not None:
        digest.update(getattr(initial, "u", initial).tobytes())
    return digest.hexdigest()[:16]


class SolutionCache:
    """Stationary trajectories per configuration fingerprint.

    Entries are tagged with the package version; a lookup with a different
    version misses.
    """

    def __init__(self):
        self._entries: Dict[str, Any] = {}
        self._versions: Dict[str, str] = {}

    def get(self, key: str, version: Optional[str] = VERSION) -> Optional[Any]:
        if key not in self._entries:
            return None
        if version is not None and self._versions.get(key) != version:
            return None
        logger.info(f"solution cache hit: {key}")
        return self._entries[key]

    def set(self, key: str, trajectory: Any, version: Optional[str] = VERSION) -> None:
        self._entries[key] = trajectory
        if version:
            self._versions[key] = version

    def clear(self) -> None:
        self._entries.clear()
        self._versions.clear()

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: str) -> bool:
        return key in self._entries


solution_cache = SolutionCache()
