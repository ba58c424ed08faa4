# HTTP routes for solve, check and optimize
