# This file is part of the affinform package.
#
# This program is free software: you can redistribute it and/or modify it under the
# terms of the Apache License (v2.0) as published by the Apache Software Foundation.
#
# This program is distributed in the hope that it will be useful, but WITHOUT ANY
# WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A
# PARTICULAR PURPOSE. See the Apache License for more details.
#
# You should have received a copy of the Apache License along with this program.
# If not, see <https://www.apache.org/licenses/LICENSE-2.0>.

"""Parametric models fit against recorded convergence metrics."""

# standard libs
from numbers import Number
from typing import Callable, List, Tuple

# external libs
import numpy as np
import pandas as pd
from scipy.optimize import curve_fit

# internal libs
from ..core.logging import log


class Parameter:
    """Numerical value with an optional uncertainty and a display label.

       Attributes
       ----------
       value: float
           The numerical value of the parameter.
       uncertainty: float (default=None)
           The one-sigma uncertainty reported by the optimizer.
       label: str (default=None)
           The name of the parameter (used by the Model for display purposes).
    """

    def __init__(self, value: float, uncertainty: float = None, label: str = None) -> None:
        """Initialize attributes."""
        self.value = value
        self.uncertainty = uncertainty
        self.label = label

    @property
    def value(self) -> float:
        return self.__value

    @value.setter
    def value(self, val: float) -> None:
        if not isinstance(val, Number) or isinstance(val, complex):
            raise TypeError(f'{self.__class__.__name__}.value expects type float, given {val}.')
        self.__value = float(val)

    @property
    def uncertainty(self) -> float:
        return self.__uncertainty

    @uncertainty.setter
    def uncertainty(self, val: float) -> None:
        if val is None:
            self.__uncertainty = None
        elif isinstance(val, Number):
            self.__uncertainty = float(val)
        else:
            raise TypeError(f'{self.__class__.__name__}.uncertainty expects type float, given {val}.')

    @property
    def label(self) -> str:
        return self.__label

    @label.setter
    def label(self, val: str) -> None:
        if val is not None and not isinstance(val, str):
            raise TypeError(f'{self.__class__.__name__}.label expects a string, given {type(val)}.')
        self.__label = val

    def __str__(self) -> str:
        return f'<{self.__class__.__name__} label={self.label} value={self.value} uncertainty={self.uncertainty}>'

    def __repr__(self) -> str:
        return str(self)


class Model:
    """Analytic function `ydata = f(xdata, *p)` with associated `Parameter`s."""

    def __init__(self, f: Callable, *parameters: Parameter, label: str = None) -> None:
        """Initialize attributes.

           Arguments
           ---------
           f: Callable
               Assumed to follow `ydata = f(xdata, *p) + eps`.
           *parameters: Parameter
               One or more Parameter objects (initial guesses).

           Options
           -------
           label: str (default=None)
               Name to be used for the model (for display purposes).
        """
        if not callable(f):
            raise TypeError(f'{self.__class__.__name__}.function expects a callable type, given {type(f)}.')
        if not parameters or not all(isinstance(p, Parameter) for p in parameters):
            raise TypeError(f'{self.__class__.__name__}.parameters expects Tuple[Parameter, ...], '
                            f'given {parameters}.')
        self.function = f
        self.parameters = list(parameters)
        self.label = label or getattr(f, '__name__', 'model')

    @property
    def values(self) -> List[float]:
        return [p.value for p in self.parameters]

    @values.setter
    def values(self, val: List[float]) -> None:
        if len(val) != len(self.parameters):
            raise TypeError(f'{self.__class__.__name__}.values expects {len(self.parameters)} values, '
                            f'given {val}.')
        for p, v in zip(self.parameters, val):
            p.value = float(v)

    @property
    def uncertainties(self) -> List[float]:
        return [p.uncertainty for p in self.parameters]

    def fit(self, xdata: np.ndarray, ydata: np.ndarray, **options) -> None:
        """Apply `scipy.optimize.curve_fit` starting from the current values."""
        popt, pcov = curve_fit(self.function, xdata, ydata, p0=self.values, **options)
        self.values = popt
        for p, variance in zip(self.parameters, np.atleast_1d(pcov.diagonal())):
            p.uncertainty = float(np.sqrt(variance)) if np.isfinite(variance) and variance >= 0 else None

    def __call__(self, xdata: np.ndarray) -> np.ndarray:
        """Evaluate the model against a new set of 'xdata'."""
        return self.function(xdata, *self.values)

    def summary(self) -> pd.DataFrame:
        """Table of current parameters."""
        return pd.DataFrame({'model': self.label,
                             'parameter': [p.label for p in self.parameters],
                             'value': self.values,
                             'uncertainty': self.uncertainties}).set_index(['model', 'parameter'])


def linear1D(x: np.ndarray, slope: float, intercept: float) -> np.ndarray:
    return slope * x + intercept


class ExponentialFit:
    """Result of fitting log(error) = rate·t + intercept.

       When the data offer no usable window (e.g. the error is identically zero)
       `applicable` is False and `rate`, `intercept` and `r_squared` are None.
    """

    def __init__(self, rate: float = None, intercept: float = None, r_squared: float = None,
                 window: Tuple[float, float] = None, points: int = 0, applicable: bool = True) -> None:
        self.rate = rate
        self.intercept = intercept
        self.r_squared = r_squared
        self.window = window
        self.points = points
        self.applicable = applicable

    @classmethod
    def declined(cls, points: int = 0) -> 'ExponentialFit':
        return cls(points=points, applicable=False)

    def to_dict(self) -> dict:
        return {'applicable': self.applicable, 'rate': self.rate, 'intercept': self.intercept,
                'r_squared': self.r_squared, 'points': self.points,
                'window': None if self.window is None else list(self.window)}

    def __str__(self) -> str:
        if not self.applicable:
            return '<ExponentialFit not applicable>'
        return f'<ExponentialFit rate={self.rate:.6g} r_squared={self.r_squared:.6f}>'

    def __repr__(self) -> str:
        return str(self)


def fit_exponential(times: np.ndarray, values: np.ndarray, lower: float = 1e-10,
                    upper_fraction: float = 0.5, min_points: int = 3) -> ExponentialFit:
    """Least-squares line through log(values) on the decay window.

       The window keeps samples with lower <= value <= upper_fraction·values[0].

       Arguments
       ---------
       times: np.ndarray
           Sample times.
       values: np.ndarray
           Positive error samples (e.g. shape error).

       Options
       -------
       lower: float (default=1e-10)
           Smallest value kept (round-off floor).
       upper_fraction: float (default=0.5)
           Fraction of the initial value above which samples are skipped (transient).
       min_points: int (default=3)
           Fits with fewer samples in the window are declined.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.shape != values.shape or times.ndim != 1:
        raise ValueError(f'fit_exponential: times and values must be matching vectors, '
                         f'given {times.shape} and {values.shape}')
    if values.size == 0 or not values[0] > lower:
        log.debug('fit_exponential: initial error below floor, fit declined')
        return ExponentialFit.declined()
    mask = (values >= lower) & (values <= upper_fraction * values[0])
    count = int(mask.sum())
    if count < min_points:
        log.debug(f'fit_exponential: {count} points in window, fit declined')
        return ExponentialFit.declined(count)
    x, y = times[mask], np.log(values[mask])
    slope0 = (y[-1] - y[0]) / (x[-1] - x[0]) if x[-1] > x[0] else 0.0
    model = Model(linear1D, Parameter(slope0, label='rate'), Parameter(y[0] - slope0 * x[0], label='intercept'),
                  label='log_error')
    model.fit(x, y)
    residual = np.sum((y - model(x)) ** 2)
    total = np.sum((y - y.mean()) ** 2)
    r_squared = 1.0 - residual / total if total > 0 else 1.0
    rate, intercept = model.values
    return ExponentialFit(rate, intercept, float(r_squared), (float(x[0]), float(x[-1])), count)
