from .config import PipelineConfig, stage_seed
from .runrecord import load_record, stage_complete, write_record

__all__ = ["PipelineConfig", "stage_seed", "load_record", "stage_complete", "write_record"]
