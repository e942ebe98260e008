from .storage import ArtifactStorageService, get_storage_service, reset_storage_service

__all__ = ['ArtifactStorageService', 'get_storage_service', 'reset_storage_service']
