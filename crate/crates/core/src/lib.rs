//! Regional energy plan synthesis and environmental assessment.

pub mod assessment;
pub mod io;
pub mod lp;
pub mod model;
pub mod pareto;
