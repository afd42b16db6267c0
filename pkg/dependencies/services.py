from typing import Optional

from .config import PipelineConfig, get_settings


def get_point_proof_service(config: Optional[PipelineConfig] = None):
    """PointProofService for the given (or default) configuration"""
    from services.pointproof_service import PointProofService
    return PointProofService(config=config or get_settings())


def get_manifold_service(config: Optional[PipelineConfig] = None):
    from services.manifold_service import ManifoldService
    return ManifoldService(config=config or get_settings())


def get_connection_service(config: Optional[PipelineConfig] = None):
    from services.connection_service import ConnectionService
    return ConnectionService(config=config or get_settings())


def get_pipeline_service(config: Optional[PipelineConfig] = None, out_dir: Optional[str] = None):
    """PipelineService wired to the storage backend named in the configuration"""
    from services.pipeline_service import PipelineService
    from services.storage import get_storage
    config = config or get_settings()
    return PipelineService(config=config, storage=get_storage(config, out_dir))
