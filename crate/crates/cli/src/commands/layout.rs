//! `qtopo layout`: force-grid placement of a topology, best of several
//! restarts by crossing count, written as SVG plus a coordinate table.

use std::path::PathBuf;

use qtopo_core::layout::{best_layout, layout_csv, layout_svg, GridLayout, LayoutParams};

use crate::{load_topology, write_snapshot, CliError};

#[derive(Debug, Clone)]
pub struct LayoutArgs {
    /// `grid:RxC`, `line:N`, or `file:PATH`.
    pub topology: String,
    pub restarts: usize,
    pub seed: u64,
    /// Repulsion multiplier for sparser placements.
    pub sparse: f64,
    pub max_degree: usize,
    pub out_dir: PathBuf,
}

impl Default for LayoutArgs {
    fn default() -> Self {
        Self {
            topology: String::new(),
            restarts: 10,
            seed: 0,
            sparse: 1.0,
            max_degree: qtopo_core::topology::DEFAULT_MAX_DEGREE,
            out_dir: PathBuf::from("qtopo-runs/layout"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LayoutSummary {
    pub vertices: usize,
    pub crossings: usize,
    pub grid: GridLayout,
}

pub fn cmd_layout(args: &LayoutArgs) -> Result<LayoutSummary, CliError> {
    if args.restarts == 0 {
        return Err(CliError::Parse("restarts must be at least 1".into()));
    }
    if args.sparse <= 0.0 {
        return Err(CliError::Parse("sparse factor must be positive".into()));
    }
    let (graph, _label) = load_topology(&args.topology, args.max_degree)?;
    let params = LayoutParams {
        sparse: args.sparse,
        ..LayoutParams::default()
    };
    let seeds: Vec<u64> = (0..args.restarts as u64)
        .map(|i| args.seed.wrapping_add(i))
        .collect();
    let grid = best_layout(&graph, &seeds, &params);

    let settings = format!(
        "command = layout\ntopology = {}\nrestarts = {}\nseed = {}\nsparse = {:?}\nmax_degree = {}\n",
        args.topology, args.restarts, args.seed, args.sparse, args.max_degree
    );
    write_snapshot(&args.out_dir, &settings)?;
    std::fs::write(args.out_dir.join("layout.svg"), layout_svg(&grid, &graph))?;
    std::fs::write(args.out_dir.join("layout.csv"), layout_csv(&grid))?;

    Ok(LayoutSummary {
        vertices: graph.num_vertices(),
        crossings: grid.crossing_count,
        grid,
    })
}
