import warnings

# numba warns about an old TBB when picking its threading layer; harmless here
warnings.filterwarnings("ignore", module="numba.np.ufunc.parallel")
