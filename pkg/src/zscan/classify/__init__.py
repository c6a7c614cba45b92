from .knn import SubspaceKnnModel, train_subspace_knn
from .model import MODEL_TAGS, TrainedClassifier, evaluate, make_trainer, predict
from .qda import QdaModel, train_qda
from .svm import SvmModel, kernel_matrix, kkt_residuals, train_svm
from .validation import (
    CrossValidationResult,
    cross_validate,
    split_train_test,
    stratified_folds,
    stratified_split_indices,
)

__all__ = [
    "MODEL_TAGS", "CrossValidationResult", "QdaModel", "SubspaceKnnModel", "SvmModel",
    "TrainedClassifier", "cross_validate", "evaluate", "kernel_matrix", "kkt_residuals",
    "make_trainer", "predict", "split_train_test", "stratified_folds",
    "stratified_split_indices", "train_qda", "train_subspace_knn", "train_svm",
]
