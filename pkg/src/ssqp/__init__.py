"""Full-reference image quality prediction toolkit.

Structural features from banded SVD reconstructions and statistical
features from coefficient-of-variation histogram distances are fused by a
3-stage stack of nu-SVRs. Includes the training/evaluation protocol,
pairwise-comparison score aggregation, and PSNR/SSIM baselines.
"""

__version__ = "0.1.0"

from .imgproc import GrayImage, load_image, partition_blocks, dct2, idct2
from .svdfeat import SvdBands, svd_bands, ensemble_image, f1_svd, f2_svd, f3_svd, f4_svd
from .histfeat import CovHistogram, cov, cov_histogram, kl_distance, f1_f2_hist, f3_f4_hist
from .pipeline import (
    ExtractionConfig,
    FeatureGroupSet,
    extract_full_frame,
    extract_block_average,
    extract_features,
)
from .svr import Normalizer, SvrHyperparams, SvrModel, train_nu_svr, grid_search_cv, fit_svr
from .boost import (
    SsqpModel,
    TrainingRow,
    TrainingSet,
    train_ssqp,
    predict_ssqp,
    save_model,
    load_model,
)
from .evaluation import LogisticFit, EvalReport, fit_logistic, pcc, srocc, rmse, split_protocol
from .pcagg import PreferenceMatrix, counts_mos, bradley_terry, thurstone_mosteller, aggregate
from .baselines import psnr, ssim

__all__ = [
    "GrayImage", "load_image", "partition_blocks", "dct2", "idct2",
    "SvdBands", "svd_bands", "ensemble_image", "f1_svd", "f2_svd", "f3_svd", "f4_svd",
    "CovHistogram", "cov", "cov_histogram", "kl_distance", "f1_f2_hist", "f3_f4_hist",
    "ExtractionConfig", "FeatureGroupSet", "extract_full_frame", "extract_block_average",
    "extract_features",
    "Normalizer", "SvrHyperparams", "SvrModel", "train_nu_svr", "grid_search_cv", "fit_svr",
    "SsqpModel", "TrainingRow", "TrainingSet", "train_ssqp", "predict_ssqp",
    "save_model", "load_model",
    "LogisticFit", "EvalReport", "fit_logistic", "pcc", "srocc", "rmse", "split_protocol",
    "PreferenceMatrix", "counts_mos", "bradley_terry", "thurstone_mosteller", "aggregate",
    "psnr", "ssim",
]
