"""Train a day-ahead load forecaster on one synthetic household.

Generates a year of habitual consumption, fits the autoregressive network on
the hourly series, predicts the next day, and checks the residual
autocorrelation diagnostics.
"""

import numpy as np

from loadshift import (
    SyntheticRecipe,
    TrainingConfig,
    error_autocorrelation,
    generate_fleet,
    hourly_series_from_history,
    predict_day,
)
from loadshift.forecast import fit_series, forward


def main():
    recipe = SyntheticRecipe(household_count=1, history_days=364, simulated_days=1)
    fleet = generate_fleet(recipe, seed=42)
    household = fleet.households[0]
    print(f"household {household.id}: {len(household.history)} days of history")

    series = hourly_series_from_history(household.history, lag=24)
    print(f"hourly series: {series.sample_count} samples, lag {series.lag}")

    cfg = TrainingConfig(max_epochs=60, rng_seed=0)
    result, split = fit_series(series, cfg, hidden_size=10)
    print(f"split sizes (train/val/test): {split.sizes()}")
    print(
        f"stopped after {len(result.train_mse) - 1} epochs ({result.stop_reason}); "
        f"train MSE {result.train_mse[-1]:.5f}, "
        f"best validation MSE {result.validation_mse[result.best_epoch]:.5f}"
    )

    prediction = predict_day(result.network, series)
    print(f"predicted next-day energy: {prediction.energy_kwh():.2f} kWh")
    peak_slot = int(np.argmax(prediction.values)) + 1
    print(f"predicted peak: {prediction.values.max():.2f} kW at slot {peak_slot}")

    # residuals on the held-out test pairs
    x_test, y_test = series.pairs_for_targets(split.test_indices)
    predicted = np.array([forward(result.network, row) for row in x_test])
    diag = error_autocorrelation(y_test - predicted, max_lag=20)
    outside = diag.lags_outside_bound()
    print(
        f"residual autocorrelation: {len(outside)}/20 lags outside "
        f"the ±{diag.confidence_bound:.4f} band {list(outside) or ''}"
    )


if __name__ == "__main__":
    main()
