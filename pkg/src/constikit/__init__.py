"""constikit: a constitutive-model interoperability kernel.

Bridges the incremental/engineering-shear/Cauchy/Jaumann material convention
("umat-style") and the total-strain/second-Piola-Kirchhoff/dS-dF convention
("host-style"), with reference material models, a small nonlinear FE driver,
a hydrogen-transport coupling demo, and a binary material-plugin boundary.
"""

from . import materials
from .bridge import (
    cauchy_to_second_pk,
    dtau_dF,
    eval_material,
    finite_strain_increment,
    tangent_jaumann_to_dSdF,
)
from .errors import (
    CaseFileError,
    ConstikitError,
    ContractViolationError,
    IncrementFailureError,
    InvalidConfigurationError,
    MaterialError,
    NonConvergenceError,
    PluginLoadError,
    PluginSymbolError,
    SingularMatrixError,
)
from .material_api import (
    HostRequest,
    HostResponse,
    Material,
    Regime,
    UmatCall,
    UmatResult,
    pack_state,
    unpack_state,
)
from .voigt import (
    Convention,
    Kind,
    VoigtVector,
    det3,
    host_strain,
    host_stress,
    inv3,
    polar_decompose,
    reorder_strain_host_to_umat,
    reorder_strain_umat_to_host,
    reorder_stress_host_to_umat,
    reorder_stress_umat_to_host,
    reorder_tangent_umat_to_host,
    umat_strain,
    umat_stress,
)

__version__ = "0.1.0"
