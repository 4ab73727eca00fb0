from .convert import (
    ConversionReport,
    MissingRawFile,
    UnknownDataset,
    VerifyResult,
    convert_planetoid,
    verify_bundle,
)

__all__ = [
    "ConversionReport", "MissingRawFile", "UnknownDataset", "VerifyResult",
    "convert_planetoid", "verify_bundle",
]
