"""zeroleaf-exporter: encode class descriptions and images into ZSEB embedding
exchange files, via a pretrained vision-language encoder or a deterministic
stub for hermetic testing."""

from .export import encode_images, encode_prompts
from .providers import ClipProvider, StubProvider, make_provider
from .stub import stub_encode

__version__ = "0.1.0"

__all__ = [
    "ClipProvider",
    "StubProvider",
    "encode_images",
    "encode_prompts",
    "make_provider",
    "stub_encode",
]
