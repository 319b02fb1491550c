from .app import create_app
from .log import AnnotationLog

__all__ = ["create_app", "AnnotationLog"]
