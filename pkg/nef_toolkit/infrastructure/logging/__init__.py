from .logger import get_logger, AppLogger

__all__ = ['get_logger', 'AppLogger']
