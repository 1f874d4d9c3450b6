"""In-memory storage of completed fits served by the HTTP API."""

from __future__ import annotations

import re
import threading
import uuid
from collections import OrderedDict
from datetime import datetime, timezone
from typing import List, Optional

from .errors import InputError
from .schemas import FitReq, FitResp, RunListing, RunRecord


class RunStore:
    """Bounded store of fit results; the oldest run is evicted when full."""

    def __init__(self, max_runs: int = 100):
        self.max_runs = max_runs
        self._runs: "OrderedDict[str, RunRecord]" = OrderedDict()
        self._lock = threading.Lock()

    @staticmethod
    def _validate_run_id(run_id: str) -> None:
        if not run_id or len(run_id) > 100:
            raise InputError("Invalid run ID")
        if not re.match(r"^[a-zA-Z0-9_-]+$", run_id):
            raise InputError("Run ID contains invalid characters")

    @staticmethod
    def new_id() -> str:
        return uuid.uuid4().hex[:12]

    def add(self, run_id: str, request: FitReq, response: FitResp) -> RunRecord:
        self._validate_run_id(run_id)
        record = RunRecord(
            id=run_id,
            created_at=datetime.now(timezone.utc).isoformat(),
            request=request,
            response=response,
        )
        with self._lock:
            self._runs[run_id] = record
            while len(self._runs) > self.max_runs:
                self._runs.popitem(last=False)
        return record

    def get(self, run_id: str) -> Optional[RunRecord]:
        self._validate_run_id(run_id)
        with self._lock:
            return self._runs.get(run_id)

    def list(self) -> List[RunListing]:
        """Newest first."""

        with self._lock:
            records = list(self._runs.values())
        return [
            RunListing(
                id=record.id,
                created_at=record.created_at,
                n=len(record.request.values),
                k=record.request.k,
                repulsive=record.request.repulsive,
            )
            for record in reversed(records)
        ]

    def delete(self, run_id: str) -> bool:
        self._validate_run_id(run_id)
        with self._lock:
            return self._runs.pop(run_id, None) is not None

    def clear(self) -> None:
        with self._lock:
            self._runs.clear()


run_store = RunStore()
