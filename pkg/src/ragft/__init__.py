"""Region-adaptive graph Fourier transform codec for point cloud colors."""
from .coding import Bitstream, decode, dequantize, encode, quantize
from .hierarchy import BlockSchedule, PartitionTree, build_binary_tree, build_tree, level_blocks
from .io import RawCloud, VoxelizedCloud, read_ply, rgb_to_yuv, voxelize, write_ply, yuv_to_rgb
from .spectral import BlockGraph, BlockTransform, apply_block, block_transform, build_block_graph
from .transforms import Backend, CoefficientSet, SpectralConfig, TransformPlan

__version__ = "0.1.0"
