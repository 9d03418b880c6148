"""Published three-decimal values of alpha_{k l} for 3 <= k <= l <= 15."""

REFERENCE_ALPHA = {
    (3, 3): 0.836, (3, 4): 0.904, (3, 5): 0.938, (3, 6): 0.957, (3, 7): 0.969, (3, 8): 0.976, (3, 9): 0.982, (3, 10): 0.985, (3, 11): 0.988, (3, 12): 0.990, (3, 13): 0.992, (3, 14): 0.993, (3, 15): 0.994,
    (4, 4): 0.858, (4, 5): 0.899, (4, 6): 0.924, (4, 7): 0.940, (4, 8): 0.952, (4, 9): 0.960, (4, 10): 0.967, (4, 11): 0.972, (4, 12): 0.975, (4, 13): 0.979, (4, 14): 0.981, (4, 15): 0.983,
    (5, 5): 0.877, (5, 6): 0.904, (5, 7): 0.923, (5, 8): 0.936, (5, 9): 0.946, (5, 10): 0.954, (5, 11): 0.960, (5, 12): 0.964, (5, 13): 0.968, (5, 14): 0.972, (5, 15): 0.974,
    (6, 6): 0.892, (6, 7): 0.911, (6, 8): 0.926, (6, 9): 0.936, (6, 10): 0.945, (6, 11): 0.952, (6, 12): 0.957, (6, 13): 0.961, (6, 14): 0.965, (6, 15): 0.968,
    (7, 7): 0.903, (7, 8): 0.918, (7, 9): 0.930, (7, 10): 0.938, (7, 11): 0.945, (7, 12): 0.951, (7, 13): 0.956, (7, 14): 0.960, (7, 15): 0.963,
    (8, 8): 0.913, (8, 9): 0.924, (8, 10): 0.934, (8, 11): 0.941, (8, 12): 0.947, (8, 13): 0.952, (8, 14): 0.956, (8, 15): 0.960,
    (9, 9): 0.920, (9, 10): 0.930, (9, 11): 0.937, (9, 12): 0.944, (9, 13): 0.949, (9, 14): 0.953, (9, 15): 0.957,
    (10, 10): 0.927, (10, 11): 0.935, (10, 12): 0.941, (10, 13): 0.946, (10, 14): 0.951, (10, 15): 0.954,
    (11, 11): 0.932, (11, 12): 0.939, (11, 13): 0.944, (11, 14): 0.949, (11, 15): 0.953,
    (12, 12): 0.937, (12, 13): 0.942, (12, 14): 0.947, (12, 15): 0.951,
    (13, 13): 0.941, (13, 14): 0.946, (13, 15): 0.950,
    (14, 14): 0.944, (14, 15): 0.949,
    (15, 15): 0.948,
}
