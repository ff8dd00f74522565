"""Table sketches, sketch-based encoders and table search."""

from ._lakesketch import (
    Column,
    ColumnSketch,
    FormatError,
    IncompatibleSketchError,
    InvalidArgument,
    IoError,
    LakesketchError,
    LshForest,
    MinHashSignature,
    Model,
    ShapeError,
    Table,
    TableSketch,
    TrainingDiverged,
    ZeroColumnsError,
    __version__,
    cosine_distance,
    evaluate_retrieval,
    f1_at_k,
    generate_benchmark,
    infer_column_type,
    jaccard_estimate,
    load_sketch,
    macro_f1,
    make_table,
    minhash,
    numerical_sketch,
    parse_csv_text,
    precision_at_k,
    r2_score,
    read_csv,
    recall_at_k,
    sketch_table,
    weighted_f1,
)

__all__ = [name for name in dir() if not name.startswith("_")]
