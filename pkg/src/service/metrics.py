"""Request metrics for the inference service.

Thread-safe, bounded, in-memory store that tracks:
- Request latency percentiles
- Request and error counts per route

This counter is the only mutable state the service shares across requests.
"""

from __future__ import annotations

import threading
import time
from collections import deque
from dataclasses import dataclass
from typing import Any

import numpy as np


@dataclass
class RequestPoint:
    timestamp: float
    route: str
    duration_ms: float
    status_code: int


class RequestMetrics:
    """Rolling window of the last ``max_points`` requests plus lifetime totals."""

    def __init__(self, max_points: int = 2000):
        self._lock = threading.Lock()
        self._points: deque[RequestPoint] = deque(maxlen=max_points)
        self._total_requests = 0
        self._total_errors = 0
        self._start_time = time.time()

    def record(self, route: str, duration_ms: float, status_code: int) -> None:
        point = RequestPoint(time.time(), route, duration_ms, status_code)
        with self._lock:
            self._points.append(point)
            self._total_requests += 1
            if status_code >= 400:
                self._total_errors += 1

    def get_snapshot(self) -> dict[str, Any]:
        now = time.time()
        with self._lock:
            points = list(self._points)
            total, errors_total = self._total_requests, self._total_errors
            uptime = now - self._start_time

        routes: dict[str, dict[str, Any]] = {}
        for p in points:
            r = routes.setdefault(p.route, {"count": 0, "errors": 0, "total_ms": 0.0})
            r["count"] += 1
            r["total_ms"] += p.duration_ms
            if p.status_code >= 400:
                r["errors"] += 1
        for r in routes.values():
            r["avg_ms"] = round(r.pop("total_ms") / r["count"], 2)

        durations = np.array([p.duration_ms for p in points])
        if durations.size:
            p50, p95, p99 = np.percentile(durations, [50, 95, 99]).tolist()
            peak = float(durations.max())
        else:
            p50 = p95 = p99 = peak = 0.0

        return {
            "uptime_seconds": round(uptime, 1),
            "total_requests": total,
            "total_errors": errors_total,
            "window": {
                "count": len(points),
                "p50_latency_ms": round(p50, 2),
                "p95_latency_ms": round(p95, 2),
                "p99_latency_ms": round(p99, 2),
                "max_latency_ms": round(peak, 2),
            },
            "routes": routes,
        }

    def reset(self) -> None:
        with self._lock:
            self._points.clear()
            self._total_requests = 0
            self._total_errors = 0
            self._start_time = time.time()
