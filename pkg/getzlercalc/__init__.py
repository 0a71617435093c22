from .eqforms import EqForm, VectorField, ahat, ch_rel, d, d_g  # noqa: F401
from .gradealg import Multivector, berezin_str, clifford_mul, quantize, symbol_map, wedge  # noqa: F401
from .harness import RunConfig, load_config, run  # noqa: F401
from .kirillov import QuadratureConfig, index_oracle, kirillov_check  # noqa: F401
from .mehler import kernel_supertrace_at_one, mehler_kernel, verify_heat_equation  # noqa: F401
from .scalar import Scalar  # noqa: F401
from .version import __version__  # noqa: F401
