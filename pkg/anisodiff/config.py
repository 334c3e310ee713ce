import os


class Config(object):
    """ Class to hold global configuration. """

    TRACE_METHOD = os.environ.get('ANISODIFF_TRACE_METHOD', 'RK45')
    """ Name of the :func:`scipy.integrate.solve_ivp` method used to trace
    field lines. It must be an explicit embedded Runge-Kutta pair of at least
    fourth order, so 'RK45' or 'DOP853'.
    """

    def __init__(self):
        self.CG_RTOL = os.environ.get('ANISODIFF_CG_RTOL', 1e-10)
        self.CG_MAXIT_FACTOR = os.environ.get('ANISODIFF_CG_MAXIT_FACTOR', 10)
        self.TRACE_RTOL = os.environ.get('ANISODIFF_TRACE_RTOL', 1e-6)
        self.TRACE_ATOL = os.environ.get('ANISODIFF_TRACE_ATOL', 1e-6)
        self.DENSE_AUDIT_CAP = \
            os.environ.get('ANISODIFF_DENSE_AUDIT_CAP', 4096)
        self.BOUNDARY_TOL = os.environ.get('ANISODIFF_BOUNDARY_TOL', 1e-9)
        self.MAP_CACHE_SIZE = os.environ.get('ANISODIFF_MAP_CACHE_SIZE', 16)

    @staticmethod
    def _positive(name, value, cast=float):
        value = cast(value)
        if not value > 0:
            raise ValueError('{0} must be positive, got {1}.'.format(name,
                                                                     value))
        return value

    @property
    def CG_RTOL(self):
        """ Relative tolerance of the conjugate gradient solver. Iteration
        stops when ``||r||_H <= CG_RTOL * ||x||_H``. Default is 1e-10.

        This value can also be set using the environment variable
        `ANISODIFF_CG_RTOL`.
        """
        return self._CG_RTOL

    @CG_RTOL.setter
    def CG_RTOL(self, value):
        self._CG_RTOL = self._positive('CG_RTOL', value)

    @property
    def CG_MAXIT_FACTOR(self):
        """ Iteration cap of the conjugate gradient solver, as multiple of the
        number of unknowns. Default is 10.

        This value can also be set using the environment variable
        `ANISODIFF_CG_MAXIT_FACTOR`.
        """
        return self._CG_MAXIT_FACTOR

    @CG_MAXIT_FACTOR.setter
    def CG_MAXIT_FACTOR(self, value):
        self._CG_MAXIT_FACTOR = self._positive('CG_MAXIT_FACTOR', value, int)

    @property
    def TRACE_RTOL(self):
        """ Relative tolerance of the field line integrator. Default is 1e-6.

        This value can also be set using the environment variable
        `ANISODIFF_TRACE_RTOL`.
        """
        return self._TRACE_RTOL

    @TRACE_RTOL.setter
    def TRACE_RTOL(self, value):
        self._TRACE_RTOL = self._positive('TRACE_RTOL', value)

    @property
    def TRACE_ATOL(self):
        """ Absolute tolerance of the field line integrator. Default is 1e-6.

        This value can also be set using the environment variable
        `ANISODIFF_TRACE_ATOL`.
        """
        return self._TRACE_ATOL

    @TRACE_ATOL.setter
    def TRACE_ATOL(self, value):
        self._TRACE_ATOL = self._positive('TRACE_ATOL', value)

    @property
    def DENSE_AUDIT_CAP(self):
        """ Largest number of unknowns for which dense audits are performed.
        Default is 4096.

        This value can also be set using the environment variable
        `ANISODIFF_DENSE_AUDIT_CAP`.
        """
        return self._DENSE_AUDIT_CAP

    @DENSE_AUDIT_CAP.setter
    def DENSE_AUDIT_CAP(self, value):
        self._DENSE_AUDIT_CAP = self._positive('DENSE_AUDIT_CAP', value, int)

    @property
    def BOUNDARY_TOL(self):
        """ Relative distance, as fraction of the interval length, within
        which a landing point beyond a non-periodic boundary is still
        considered to lie on it. Default is 1e-9. Field line traces widen it
        to ten times their integration tolerance.

        This value can also be set using the environment variable
        `ANISODIFF_BOUNDARY_TOL`.
        """
        return self._BOUNDARY_TOL

    @BOUNDARY_TOL.setter
    def BOUNDARY_TOL(self, value):
        self._BOUNDARY_TOL = self._positive('BOUNDARY_TOL', value)

    @property
    def MAP_CACHE_SIZE(self):
        """ Number of traced parallel maps kept in memory. The least recently
        used map is dropped first. Default is 16.

        This value can also be set using the environment variable
        `ANISODIFF_MAP_CACHE_SIZE`.
        """
        return self._MAP_CACHE_SIZE

    @MAP_CACHE_SIZE.setter
    def MAP_CACHE_SIZE(self, value):
        self._MAP_CACHE_SIZE = self._positive('MAP_CACHE_SIZE', value, int)
