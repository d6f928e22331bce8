from stackcast.indicators.catalog import (
    IndicatorSpec,
    catalog_names,
    compute_catalog,
    default_catalog,
    get_spec,
    max_warmup,
)
from stackcast.indicators.frame import FeatureFrame, attach_external_columns, build_feature_frame
from stackcast.indicators.stream import IndicatorStream, StreamNotWarmedError

__all__ = [
    "IndicatorSpec",
    "catalog_names",
    "compute_catalog",
    "default_catalog",
    "get_spec",
    "max_warmup",
    "FeatureFrame",
    "build_feature_frame",
    "attach_external_columns",
    "IndicatorStream",
    "StreamNotWarmedError",
]
