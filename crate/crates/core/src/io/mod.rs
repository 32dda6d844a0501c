//! Graph files, synthetic generators and the spatial-adjacency builder.

mod dataset;
mod edge_list;
mod generators;
mod graph_file;
mod spatial;

pub use dataset::{load_dataset, read_graph, DatasetEntry};
pub use edge_list::{load_edge_list, parse_edge_list};
pub use generators::{gen_ba, gen_nws, Sampler};
pub use graph_file::{
    graph_from_json, graph_to_json, load_graph, load_graph_with, save_graph, GraphFile, LabelDecl,
};
pub use spatial::{spatial_graph, spatial_weight, PointCloud};
