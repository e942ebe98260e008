from .local_filesystem import LocalFilesystemArtifactStore, format_value

__all__ = ["LocalFilesystemArtifactStore", "format_value"]
