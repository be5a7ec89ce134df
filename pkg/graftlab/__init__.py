"""Core logic for grafting, traintrack and quasiconformal comparison experiments."""

from .cylinder_geometry import make_cylinder, modified_metric, xi_map
from .grafting import graft, thurston_metric_summary, two_pi_graft
from .qc_assembly import assemble, run_experiment, synthesize_branch_pairs
from .traintrack import approximate_ray, cone_basis, trace_multiloop

__all__ = [
	"make_cylinder",
	"modified_metric",
	"xi_map",
	"graft",
	"thurston_metric_summary",
	"two_pi_graft",
	"assemble",
	"run_experiment",
	"synthesize_branch_pairs",
	"approximate_ray",
	"cone_basis",
	"trace_multiloop",
]
