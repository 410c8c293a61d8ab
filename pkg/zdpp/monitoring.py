"""
Evaluation Monitoring

Prometheus metrics for numeric routes and verification checks.
"""

from prometheus_client import Counter, Histogram, Gauge, generate_latest
from functools import wraps
import time


# Define metrics
evaluation_duration = Histogram(
    "zdpp_evaluation_duration_seconds", "Time spent in a numeric operation", ["operation"]
)

route_fallbacks = Counter(
    "zdpp_route_fallbacks_total",
    "Automatic route switches after a route-level failure",
    ["operation", "from_route", "to_route"],
)

failed_checks = Counter("zdpp_failed_checks_total", "Verification checks that failed", ["check"])

route_matrix_pass_ratio = Gauge(
    "zdpp_route_matrix_pass_ratio", "Fraction of passing checks in the last verification run"
)

quadrature_levels = Histogram(
    "zdpp_quadrature_levels",
    "Node-doubling level at which a quadrature converged",
    ["rule"],
    buckets=(0, 1, 2, 3, 4, 5, 6, 8),
)


def track_execution_time(operation: str):
    """Decorator to track the wall time of a numeric operation."""

    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            start = time.time()
            try:
                return func(*args, **kwargs)
            finally:
                duration = time.time() - start
                evaluation_duration.labels(operation=operation).observe(duration)

        return wrapper

    return decorator


def get_metrics() -> str:
    """Get current Prometheus metrics in text format."""
    return generate_latest().decode("utf-8")
