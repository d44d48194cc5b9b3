"""Thread-safe token bucket shared by every registry worker."""

import threading
import time
from typing import Callable


class RateLimiter:
    """Token bucket limiting requests per second across threads.

    The bucket holds at most ``capacity`` tokens and refills at ``rate``
    tokens per second. With the default capacity of 1 no burst is allowed,
    so the observed rate over any window stays at or below ``rate``.
    """

    def __init__(
        self,
        rate: float,
        capacity: float = 1.0,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if rate <= 0:
            raise ValueError("rate must be positive")
        self.rate = rate
        self.capacity = capacity
        self._clock = clock
        self._sleep = sleep
        self._tokens = capacity
        self._updated_at = clock()
        self._lock = threading.Lock()

    def _refill(self, now: float) -> None:
        elapsed = now - self._updated_at
        if elapsed > 0:
            self._tokens = min(self.capacity, self._tokens + elapsed * self.rate)
            self._updated_at = now

    def acquire(self) -> float:
        """Block until a token is available and take it.

        Returns:
            Seconds spent waiting.
        """
        waited = 0.0
        while True:
            with self._lock:
                self._refill(self._clock())
                if self._tokens >= 1:
                    self._tokens -= 1
                    return waited
                wait = (1 - self._tokens) / self.rate
            self._sleep(wait)
            waited += wait
