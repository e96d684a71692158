from .app import create_app
from .state import ServiceCore

__all__ = ["create_app", "ServiceCore"]
