from .storage import ArtifactReference, ArtifactStoreBase

__all__ = ['ArtifactReference', 'ArtifactStoreBase']
