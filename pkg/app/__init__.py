# Perturbed OCO Simulator - adaptive primal-dual online convex optimization under perturbed long-term constraints
