from .v1 import runs_router

__all__ = ['runs_router']
