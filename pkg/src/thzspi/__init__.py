"""Time-domain terahertz single-pixel imaging: simulation and reconstruction."""
from .analysis import (delay_map, peak_time, rms_error_at_peak, spectral_image,
                       spectrum, thickness_map)
from .patterns import (binary_masks, make_basis, mask_from_row, order_sequency2d,
                       sylvester_hadamard, transition_count)
from .recon import debias, invert_compressive, invert_full, reconstruct
from .scene import builtin_scene, load_scene, pixel_transfer_function
from .simulator import (DataCube, NoiseModel, TimeGrid, Waveform, ideal_cube, measure,
                        synthesize_pulse)

__version__ = "0.1.0"
