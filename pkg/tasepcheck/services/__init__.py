# Contour-integral formulas, matrices, simulation and identity checks
