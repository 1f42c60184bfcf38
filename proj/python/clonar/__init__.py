"""Python bindings for the clonar core library."""

from ._clonar import (
    ClonarError,
    anova,
    anova_from_summary,
    close_stroke,
    decimate,
    decode_png,
    encode_png,
    export_glb,
    f_survival,
    import_glb,
    point_in_polygon,
    segment,
    stub_extrude,
    sus_mean,
    sus_score,
    validate_mesh,
)

__all__ = [
    "ClonarError",
    "anova",
    "anova_from_summary",
    "close_stroke",
    "decimate",
    "decode_png",
    "encode_png",
    "export_glb",
    "f_survival",
    "import_glb",
    "point_in_polygon",
    "segment",
    "stub_extrude",
    "sus_mean",
    "sus_score",
    "validate_mesh",
]
