import unittest

import numpy as np

from errores import ErrorPadAgotado, ErrorParametro
from espacio_curvas import CurvaForward, MallaMadurez, desplazar
from hjm import (ConfiguracionHJM, PasoFrechet, alpha_hjm, campo_mu, campo_nu, correccion_ito, flujo,
                 flujo_trayectoria, frechet, paso_euler_mild)
from riccati import forma_cerrada_cir, lambda_b_vasicek
from volatilidad import EstructuraVolatilidad

BETA = 0.5
RHO = 0.02


class TestConfiguracion(unittest.TestCase):
    def test_valores_invalidos(self):
        with self.assertRaises(ErrorParametro):
            ConfiguracionHJM(paso_tiempo=0.0)
        with self.assertRaises(ErrorParametro):
            ConfiguracionHJM(paso_tiempo=2.0, horizonte=1.0)
        with self.assertRaises(ErrorParametro):
            ConfiguracionHJM(semilla=-1)
        with self.assertRaises(ErrorParametro):
            PasoFrechet(1.5)
        self.assertEqual(ConfiguracionHJM(1e-2, 1.0).n_pasos, 100)


class TestDeriva(unittest.TestCase):
    def setUp(self):
        self.malla = MallaMadurez()
        self.x = self.malla.nodos
        self.h = CurvaForward.constante(self.malla, 0.03)

    def test_alpha_vasicek(self):
        alpha = alpha_hjm(EstructuraVolatilidad.vasicek(RHO, BETA), self.h)
        esperado = RHO ** 2 * np.exp(-BETA * self.x) * (1 - np.exp(-BETA * self.x)) / BETA
        np.testing.assert_allclose(alpha.valores, esperado, atol=1e-7)
        self.assertEqual(alpha.tasa_corta, 0.0)

    def test_alpha_nula_sin_volatilidad(self):
        self.assertEqual(alpha_hjm(EstructuraVolatilidad.cero(), self.h).sup(), 0.0)

    def test_frechet_lineal_y_cuadratica(self):
        v = CurvaForward(self.malla, np.exp(-self.x))
        doble = frechet(lambda u: u * 2.0, self.h, v)
        np.testing.assert_allclose(doble.valores, 2 * v.valores, atol=1e-9)
        h = CurvaForward(self.malla, 0.02 + 0.01 * np.sin(self.x))
        cuadrado = frechet(lambda u: u * u, h, v)
        np.testing.assert_allclose(cuadrado.valores, 2 * h.valores * v.valores, atol=1e-10)

    def test_correccion_ito(self):
        self.assertEqual(correccion_ito(EstructuraVolatilidad.vasicek(RHO, BETA), self.h).sup(), 0.0)
        lam = forma_cerrada_cir(BETA, 0.1, self.malla).B
        sigma = EstructuraVolatilidad.cir(0.1, lam)
        analitica = correccion_ito(sigma, self.h)
        numerica = correccion_ito(sigma, self.h, PasoFrechet())
        self.assertLess((analitica - numerica).sup(), 1e-9)
        # D sigma(h).sigma(h) = (rho^2 / 2) lambda(0) lambda para CIR
        np.testing.assert_allclose(analitica.valores, 0.5 * 0.01 * lam.valores[0] * lam.valores, atol=1e-15)

    def test_mu_y_nu(self):
        sigma = EstructuraVolatilidad.vasicek(RHO, BETA)
        nu = campo_nu(sigma, self.h)
        mu = campo_mu(sigma, self.h)
        self.assertLess((nu - mu).sup(), 1e-18)
        self.assertLess((nu - alpha_hjm(sigma, self.h)).sup(), 1e-14)


class TestEuler(unittest.TestCase):
    def setUp(self):
        self.malla = MallaMadurez()
        self.cfg = ConfiguracionHJM(0.025, 1.0)

    def test_sin_volatilidad_es_desplazamiento(self):
        h = CurvaForward(self.malla, 0.03 + 0.01 * np.exp(-self.malla.nodos))
        nueva, truncado = paso_euler_mild(EstructuraVolatilidad.cero(), h, [0.3], self.cfg)
        self.assertFalse(truncado)
        np.testing.assert_allclose(nueva.valores, desplazar(h, 0.025).valores)
        self.assertAlmostEqual(nueva.pad_consumido, 0.025)

    def test_ruido_suma_sigma(self):
        h = CurvaForward.constante(self.malla, 0.03)
        sigma = EstructuraVolatilidad.vasicek(RHO, BETA)
        a, _ = paso_euler_mild(sigma, h, [0.0], self.cfg)
        b, _ = paso_euler_mild(sigma, h, [0.1], self.cfg)
        s = desplazar(sigma.evaluar(h)[0], 0.025)
        np.testing.assert_allclose((b - a).valores, 0.1 * s.valores, atol=1e-15)

    def test_dimension_de_incrementos(self):
        h = CurvaForward.constante(self.malla, 0.03)
        with self.assertRaises(ErrorParametro):
            paso_euler_mild(EstructuraVolatilidad.vasicek(RHO, BETA), h, [0.1, 0.2], self.cfg)

    def test_piso_fuera_del_dominio(self):
        lam = forma_cerrada_cir(BETA, 0.1, self.malla).B
        sigma = EstructuraVolatilidad.cir(0.1, lam, 1e-6)
        h = CurvaForward.constante(self.malla, -0.001)
        _, truncado = paso_euler_mild(sigma, h, [0.1], self.cfg)
        self.assertTrue(truncado)

    def test_pad_agotado(self):
        malla = MallaMadurez(5.0, 0.01, 501)
        h = CurvaForward.constante(malla, 0.03)
        with self.assertRaises(ErrorPadAgotado):
            paso_euler_mild(EstructuraVolatilidad.cero(), h, [0.0], self.cfg)


class TestFlujo(unittest.TestCase):
    def setUp(self):
        self.malla = MallaMadurez()
        self.x = self.malla.nodos

    def test_flujo_nu_vasicek(self):
        r = CurvaForward.constante(self.malla, 0.03)
        resultado = flujo("nu", EstructuraVolatilidad.vasicek(RHO, BETA), r, 0.5)
        self.assertTrue(resultado.completo)
        lam_x, _ = lambda_b_vasicek(BETA, self.x)
        lam_xt, _ = lambda_b_vasicek(BETA, self.x + 0.5)
        esperado = 0.03 + 0.5 * RHO ** 2 * (lam_xt ** 2 - lam_x ** 2)
        fin = self.malla.indice_x_max + 1
        np.testing.assert_allclose(resultado.curva.valores[:fin], esperado[:fin], atol=1e-7)
        self.assertAlmostEqual(resultado.curva.pad_consumido, 0.5)

    def test_flujo_sin_volatilidad(self):
        r = CurvaForward(self.malla, 0.02 + 0.01 * self.x / 15)
        resultado = flujo_trayectoria("mu", EstructuraVolatilidad.cero(), r, [0.0, 0.25, 0.5])
        self.assertEqual(len(resultado.curvas), 3)
        fin = self.malla.indice_x_max + 1
        np.testing.assert_allclose(resultado.curvas[2].valores[:fin], (0.02 + 0.01 * (self.x + 0.5) / 15)[:fin],
                                   atol=1e-14)

    def test_tiempo_fraccionario(self):
        r = CurvaForward(self.malla, 0.02 + 0.001 * self.x)
        resultado = flujo("nu", EstructuraVolatilidad.cero(), r, 0.0375)
        np.testing.assert_allclose(resultado.curva.valores[:10], 0.02 + 0.001 * (self.x[:10] + 0.0375),
                                   atol=1e-14)

    def test_errores(self):
        r = CurvaForward.constante(self.malla, 0.03)
        with self.assertRaises(ErrorParametro):
            flujo("otro", EstructuraVolatilidad.cero(), r, 0.1)
        with self.assertRaises(ErrorParametro):
            flujo_trayectoria("nu", EstructuraVolatilidad.cero(), r, [0.5, 0.1])
        with self.assertRaises(ErrorPadAgotado):
            flujo("nu", EstructuraVolatilidad.cero(), r, 6.0)


if __name__ == '__main__':
    unittest.main()
