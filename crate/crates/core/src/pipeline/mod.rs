//! Staged orchestration: normalize → extract → refine/cluster/emit, with
//! every stage reading and writing files in one output directory.

mod config;
mod stages;

pub use config::{ClusterGrid, EmitSection, ExtractSection, InputPaths, LinkingSection, NormalizeSection, PipelineConfig};
pub use stages::{
    run_all, stage_extract, stage_normalize, stage_refine_emit, EntityComposition, ExtractReport, NormalizeReport,
    RefineEmitReport, RunReport, TripleFlags, ENTITIES_FILE, GRAPH_FILE, GRID_FILE, NORMALIZED_FILE, RELATION_MAP_FILE,
    TRIPLES_FILE, VALIDATION_FILE,
};
