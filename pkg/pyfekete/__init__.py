from .core import PyFekete

__all__ = ['PyFekete']
