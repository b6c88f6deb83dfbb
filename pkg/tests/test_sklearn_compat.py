from sklearn.utils.estimator_checks import parametrize_with_checks

from fofpoly import SpectralPolyRegressor


@parametrize_with_checks([SpectralPolyRegressor(), SpectralPolyRegressor(degree=2, family="cutoff"),
                          SpectralPolyRegressor(family="landweber", alpha=0.05)])
def test_sklearn_compatible(estimator, check):
    check(estimator)
