"""Adaptive prefix coding with delayed code updates and constant work per symbol."""

from .analysis import (BoundReport, CorpusStats, empirical_entropy, static_huffman_bits,
                       static_shannon_bits, theorem2_experiment, verify_run, verify_sort)
from .bitio import BitReader, BitWriter, peek_window
from .canonical_code import CodeTables, Codeword, assign_first_codewords, build_predecessor
from .codec import Decoder, Encoder, decode, encode, open_stream, stream_stats
from .container import decode_all, encode_chunks
from .errors import (AlphabetError, BudgetOverrunError, CodecError, CodeInfeasibleError,
                     ConfigurationError, CorruptStreamError, GuaranteeWarning)
from .freq_model import AlphabetMap, FreqModel, LengthPolicy, delay_parameter
from .online_sorter import AlphabeticTree, OnlineSorter, build_tree, gm_codewords, stable_sort

__version__ = "0.1.0"
