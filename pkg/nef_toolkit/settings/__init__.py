from .app_settings import AppSettings, settings

__all__ = ['AppSettings', 'settings']
