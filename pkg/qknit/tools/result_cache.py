"""
Solver verdict cache
Skips re-running the external solver on an SMT-LIB2 text it has already decided
"""

import hashlib
import json
import logging
import os
import threading
import time
from functools import wraps
from typing import Any, Dict

from cachetools import TTLCache
from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)

# Cache configuration
CACHE_ENABLED = os.getenv("QKNIT_CACHE_ENABLED", "true").lower() == "true"
CACHE_TTL = int(os.getenv("QKNIT_CACHE_TTL_SECONDS", "3600"))  # 1 hour by default
CACHE_MAX_SIZE = int(os.getenv("QKNIT_CACHE_MAX_SIZE", "512"))

# TTLCache: entries expire after CACHE_TTL seconds
verdict_cache = TTLCache(maxsize=CACHE_MAX_SIZE, ttl=CACHE_TTL)
_lock = threading.Lock()

# only definitive answers are worth keeping
CACHEABLE_VERDICTS = ("sat", "unsat")

cache_stats = {
    "hits": 0,
    "misses": 0,
    "total_time_saved": 0.0,
}


def compute_problem_hash(smt_text: str, **solver_identity: Any) -> str:
    """SHA-256 over the exact solver input plus the solver command line."""
    params_str = json.dumps(solver_identity, sort_keys=True, default=str)
    return hashlib.sha256(f"{smt_text}\x00{params_str}".encode()).hexdigest()


def cache_solver_result(func):
    """
    Decorator for `solve_external(smt_text, backend)`-shaped functions.
    The returned object must expose `.verdict`; timeouts and crashes are never cached.
    """

    @wraps(func)
    def wrapper(smt_text: str, backend, *args, **kwargs):
        if not CACHE_ENABLED:
            return func(smt_text, backend, *args, **kwargs)

        # time_limit stays out of the key: minimize shrinks it every iteration
        cache_key = compute_problem_hash(smt_text, executable=backend.executable, args=list(backend.args))
        with _lock:
            cached = verdict_cache.get(cache_key)
            if cached is not None:
                cache_stats["hits"] += 1
                cache_stats["total_time_saved"] += cached["time_saved"]
        if cached is not None:
            logger.debug(f"[cache] 🎯 hit {cache_key[:12]} (saved {cached['time_saved']:.2f}s)")
            return cached["result"]

        with _lock:
            cache_stats["misses"] += 1
        start_time = time.time()
        result = func(smt_text, backend, *args, **kwargs)
        execution_time = time.time() - start_time

        if result.verdict in CACHEABLE_VERDICTS:
            with _lock:
                verdict_cache[cache_key] = {
                    "result": result,
                    "time_saved": execution_time,
                    "timestamp": time.time(),
                }
            logger.debug(f"[cache] stored {cache_key[:12]} verdict={result.verdict} ({execution_time:.2f}s)")
        return result

    return wrapper


def get_cache_stats() -> Dict[str, Any]:
    """Returns cache statistics"""
    with _lock:
        total_requests = cache_stats["hits"] + cache_stats["misses"]
        hit_rate = (cache_stats["hits"] / total_requests * 100) if total_requests > 0 else 0
        return {
            "enabled": CACHE_ENABLED,
            "hits": cache_stats["hits"],
            "misses": cache_stats["misses"],
            "total_requests": total_requests,
            "hit_rate_percent": round(hit_rate, 2),
            "total_time_saved_seconds": round(cache_stats["total_time_saved"], 2),
            "cache_size": len(verdict_cache),
            "max_size": CACHE_MAX_SIZE,
            "ttl_seconds": CACHE_TTL,
        }


def clear_cache():
    """Clears the verdict cache and its counters"""
    with _lock:
        verdict_cache.clear()
        cache_stats["hits"] = 0
        cache_stats["misses"] = 0
        cache_stats["total_time_saved"] = 0.0
    logger.info("[cache] 🧹 cleared")
