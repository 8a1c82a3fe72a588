"""Crowdsourcing backend: campaigns, reports, processing queue, payments.

``store`` persists everything in sqlite, ``core`` runs report processing on
a worker pool, ``app`` exposes the HTTP API the portal and the CLI consume.
"""

from .app import create_app
from .core import Service, ServiceError
from .store import Store

__all__ = ["Store", "Service", "ServiceError", "create_app"]
