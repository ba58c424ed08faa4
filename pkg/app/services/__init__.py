# Numerical services: meshes, fields, solvers, rearrangements, optimization
