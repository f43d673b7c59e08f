import math
import unittest

import numpy as np

from errores import ErrorDominio, ErrorPadAgotado, ErrorParametro
from espacio_curvas import CurvaForward, MallaMadurez
from hjm import ConfiguracionHJM
from lie import curvas_prueba
from modelos_afines import (ajuste_hwcir, ajuste_hwv, descomposicion_singular, malla_tiempos, precio_bono,
                            punto_singular, realizacion_desde_dict, residuo_b_c, residuo_volterra,
                            simular_realizacion, volterra_c)
from riccati import forma_cerrada_cir, forma_cerrada_vasicek

BETA = 0.5
RHO = 0.02


class TestHullWhiteVasicek(unittest.TestCase):
    def setUp(self):
        self.malla = MallaMadurez()
        self.plana = CurvaForward.constante(self.malla, 0.03)
        self.modelo = ajuste_hwv(self.plana, BETA, RHO, horizonte=0.5, dt=0.025)

    def test_b_plana(self):
        t = self.modelo.tiempos
        esperado = BETA * 0.03 + RHO ** 2 * (1 - np.exp(-2 * BETA * t)) / (2 * BETA)
        np.testing.assert_allclose(self.modelo.b_t, esperado, atol=1e-12)

    def test_psi_inicial_es_r_estrella(self):
        np.testing.assert_allclose(self.modelo.psi(0).valores, self.plana.valores, atol=1e-15)
        self.assertAlmostEqual(self.modelo.funcion_a(0).tasa_corta, 0.0, places=15)

    def test_curva_realizada(self):
        k = 10
        curva = self.modelo.curva(k, 0.01)
        carga = forma_cerrada_vasicek(BETA, self.malla).B
        np.testing.assert_allclose(curva.valores, self.modelo.psi(k).valores + 0.01 * carga.valores)
        self.assertAlmostEqual(curva.tasa_corta, self.modelo.psi(k).tasa_corta + 0.01)

    def test_sin_ruido(self):
        modelo = ajuste_hwv(self.plana, BETA, 0.0, horizonte=0.5, dt=0.025)
        for k in range(len(modelo.tiempos)):
            np.testing.assert_allclose(modelo.psi(k).valores, 0.03, atol=1e-15)
        np.testing.assert_allclose(modelo.m_t, 0.03, atol=1e-9)
        np.testing.assert_allclose(modelo.a_en_cero(), 0.0, atol=1e-9)

    def test_horizonte_mayor_que_pad(self):
        with self.assertRaises(ErrorPadAgotado):
            ajuste_hwv(self.plana, BETA, RHO, horizonte=6.0, dt=0.5)
        with self.assertRaises(ErrorParametro):
            ajuste_hwv(self.plana, -1.0, RHO)

    def test_a_en_cero_curvas_no_planas(self):
        # Nelson-Siegel crecientes, decrecientes y un miembro perturbado de Sigma
        curvas = curvas_prueba(self.malla)
        for i in (3, 5, 6, 8, 9):
            modelo = ajuste_hwv(curvas[i], BETA, RHO, horizonte=1.0, dt=1e-3)
            self.assertLess(float(np.max(np.abs(modelo.a_en_cero()))), 1e-8, f"curva {i}")

    def test_artefacto(self):
        datos = self.modelo.a_dict()
        self.assertEqual(datos["model"], "hwv")
        self.assertIn("A_at_zero", datos)
        corta = [self.modelo.psi(k).tasa_corta for k in range(len(self.modelo.tiempos))]
        np.testing.assert_allclose(datos["deterministic_short_rate"], corta)
        self.assertAlmostEqual(datos["deterministic_short_rate"][0], 0.03, places=15)
        leido = realizacion_desde_dict(datos)
        np.testing.assert_array_equal(leido.b_t, self.modelo.b_t)
        with self.assertRaises(ErrorParametro):
            realizacion_desde_dict({"model": "hwv"})


class TestHullWhiteCIR(unittest.TestCase):
    def setUp(self):
        self.malla = MallaMadurez()
        self.plana = CurvaForward.constante(self.malla, 0.03)
        self.rho = 0.1
        self.modelo = ajuste_hwcir(self.plana, BETA, self.rho, horizonte=0.5, dt=0.025)

    def test_flujo_y_volterra_coinciden(self):
        self.assertLess(np.max(np.abs(self.modelo.c_t - self.modelo.c_volterra)), 1e-5)
        self.assertAlmostEqual(self.modelo.c_t[0], 0.03, places=15)
        # c crece: la deriva de nu es positiva
        self.assertGreater(self.modelo.c_t[-1], 0.03)

    def test_residuo_volterra(self):
        t = self.modelo.tiempos
        c = volterra_c(self.plana, BETA, self.rho, t)
        self.assertLess(residuo_volterra(self.plana, BETA, self.rho, t, c), 1e-6)
        np.testing.assert_allclose(volterra_c(self.plana, BETA, 0.0, t), 0.03)

    def test_b_y_c(self):
        self.assertLess(residuo_b_c(self.modelo), 1e-6)
        np.testing.assert_allclose(self.modelo.funcion_a(0).valores,
                                   self.plana.valores - 0.03 * self.modelo.carga.valores)

    def test_dominio(self):
        negativa = CurvaForward.constante(self.malla, -0.01)
        with self.assertRaises(ErrorDominio):
            ajuste_hwcir(negativa, BETA, self.rho)
        with self.assertRaises(ErrorParametro):
            ajuste_hwcir(self.plana, BETA, 0.0)

    def test_flujo_y_volterra_curvas_no_planas(self):
        curvas = curvas_prueba(self.malla)
        for i in (3, 5, 6, 8, 9):
            modelo = ajuste_hwcir(curvas[i], BETA, self.rho, horizonte=1.0, dt=0.005)
            self.assertLess(float(np.max(np.abs(modelo.c_t - modelo.c_volterra))), 1e-5, f"curva {i}")
            self.assertLess(residuo_b_c(modelo), 1e-6, f"curva {i}")

    def test_volterra_exige_tasa_corta_positiva(self):
        t = self.modelo.tiempos
        with self.assertRaises(ErrorDominio):
            volterra_c(CurvaForward.constante(self.malla, 0.0), BETA, self.rho, t)
        with self.assertRaises(ErrorDominio):
            volterra_c(self.plana, BETA, self.rho, t, epsilon=0.05)

    def test_artefacto(self):
        datos = self.modelo.a_dict()
        self.assertIn("c_volterra", datos)
        leido = realizacion_desde_dict(datos)
        np.testing.assert_allclose(leido.c_t, self.modelo.c_t)


class TestConjuntoSingular(unittest.TestCase):
    def setUp(self):
        self.malla = MallaMadurez()

    def test_vasicek(self):
        sol = forma_cerrada_vasicek(BETA, self.malla)
        h = punto_singular(sol, "vasicek", RHO, 0.03, 0.01)
        d = descomposicion_singular(h, sol, "vasicek", RHO)
        self.assertTrue(d.es_miembro)
        a1, a2, a3 = d.coeficientes
        self.assertAlmostEqual(a1, 0.03, places=10)
        self.assertAlmostEqual(a2, -0.5 * RHO ** 2, places=10)
        self.assertAlmostEqual(a3, 0.01, places=10)
        self.assertLess(d.residuo_invariancia(), 1e-6)

    def test_curva_plana_no_pertenece(self):
        sol = forma_cerrada_vasicek(BETA, self.malla)
        d = descomposicion_singular(CurvaForward.constante(self.malla, 0.03), sol, "vasicek", RHO)
        self.assertFalse(d.es_miembro)
        self.assertAlmostEqual(d.defecto_restriccion, 0.5 * RHO ** 2, places=8)

    def test_cir(self):
        rho = 0.1
        sol = forma_cerrada_cir(BETA, rho, self.malla)
        h = punto_singular(sol, "cir", rho, 0.04, 0.02)
        d = descomposicion_singular(h, sol, "cir", rho)
        self.assertTrue(d.es_miembro)
        self.assertAlmostEqual(d.coeficientes[1], -0.5 * rho ** 2 * 0.04, places=10)
        # La restricción de Vasicek no vale para CIR
        self.assertFalse(descomposicion_singular(h, sol, "vasicek", rho).es_miembro)

    def test_parametros(self):
        sol = forma_cerrada_vasicek(BETA, self.malla)
        h = CurvaForward.constante(MallaMadurez(5.0, 1.0, 61), 0.03)
        with self.assertRaises(ErrorParametro):
            descomposicion_singular(h, sol, "vasicek", RHO)
        with self.assertRaises(ErrorParametro):
            descomposicion_singular(CurvaForward.constante(self.malla, 0.03), sol, "otro", RHO)


class TestSimulacion(unittest.TestCase):
    def setUp(self):
        self.malla = MallaMadurez()
        self.plana = CurvaForward.constante(self.malla, 0.03)
        self.modelo = ajuste_hwv(self.plana, BETA, RHO, horizonte=0.5, dt=0.025)
        self.cfg = ConfiguracionHJM(0.05, 0.5, semilla=7)

    def test_reproducible_y_paralelo(self):
        a = simular_realizacion(self.modelo, self.cfg, 6)
        b = simular_realizacion(self.modelo, self.cfg, 6, trabajadores=3)
        np.testing.assert_array_equal(a.factores, b.factores)
        np.testing.assert_array_equal(a.precios, b.precios)
        self.assertEqual(a.factores.shape, (6, 11))
        np.testing.assert_array_equal(a.factores[:, 0], 0.0)

    def test_esquemas_con_incrementos_dados(self):
        ceros = lambda i: np.zeros(10)
        for esquema in ("exacta", "euler", "exponencial"):
            ensamble = simular_realizacion(self.modelo, self.cfg, 2, esquema, incrementos=ceros)
            np.testing.assert_allclose(ensamble.factores, 0.0)
        uno = lambda i: np.r_[0.1, np.zeros(9)]
        euler = simular_realizacion(self.modelo, self.cfg, 1, "euler", incrementos=uno)
        self.assertAlmostEqual(euler.factores[0, 1], RHO * 0.1)
        self.assertAlmostEqual(euler.factores[0, 2], RHO * 0.1 * (1 - BETA * 0.05))

    def test_tasa_corta_y_precios(self):
        ensamble = simular_realizacion(self.modelo, self.cfg, 3, vencimientos=(1.0, 2.0))
        base = np.array([self.modelo.psi(k).tasa_corta for k in range(0, 21, 2)])
        np.testing.assert_allclose(ensamble.tasas_cortas, base[None, :] + ensamble.factores)
        self.assertAlmostEqual(float(ensamble.precios[0, 0, 1]), math.exp(-0.06), places=12)
        resumen = ensamble.resumen()
        self.assertEqual(resumen["n_paths"], 3)
        self.assertEqual(resumen["floor_free_fraction"], 1.0)

    def test_errores(self):
        with self.assertRaises(ErrorParametro):
            simular_realizacion(self.modelo, ConfiguracionHJM(0.05, 1.0), 2)
        with self.assertRaises(ErrorParametro):
            simular_realizacion(self.modelo, self.cfg, 2, "milstein")
        with self.assertRaises(ErrorParametro):
            simular_realizacion(self.modelo, ConfiguracionHJM(0.03, 0.3), 2)
        with self.assertRaises(ErrorParametro):
            simular_realizacion(self.modelo, self.cfg, 2, incrementos=lambda i: np.zeros(3))

    def test_varianza_ou_exacta(self):
        n = 2000
        ensamble = simular_realizacion(self.modelo, ConfiguracionHJM(0.05, 0.5, semilla=11), n, "exacta",
                                       vencimientos=())
        final = ensamble.factores[:, -1]
        varianza = RHO ** 2 * (1 - math.exp(-2 * BETA * 0.5)) / (2 * BETA)
        error_varianza = varianza * math.sqrt(2.0 / (n - 1))
        self.assertLess(abs(float(final.var(ddof=1)) - varianza), 3 * error_varianza)
        self.assertLess(abs(float(final.mean())), 3 * math.sqrt(varianza / n))

    def test_cir_con_piso(self):
        modelo = ajuste_hwcir(self.plana, BETA, 0.1, horizonte=0.5, dt=0.025)
        ensamble = simular_realizacion(modelo, self.cfg, 2, incrementos=lambda i: np.full(10, -2.0))
        self.assertGreater(sum(ensamble.eventos_piso), 0)
        self.assertLess(ensamble.fraccion_sin_piso, 1.0)


class TestUtilidades(unittest.TestCase):
    def test_precio_bono(self):
        plana = CurvaForward.constante(MallaMadurez(), 0.03)
        self.assertAlmostEqual(precio_bono(plana, 2.0), math.exp(-0.06), places=12)
        self.assertEqual(precio_bono(plana, 0.0), 1.0)
        with self.assertRaises(ErrorDominio):
            precio_bono(plana, 11.0)

    def test_malla_tiempos(self):
        t = malla_tiempos(1.0, 0.25)
        np.testing.assert_allclose(t, [0.0, 0.25, 0.5, 0.75, 1.0])
        with self.assertRaises(ErrorParametro):
            malla_tiempos(1.0, 0.3)


if __name__ == '__main__':
    unittest.main()
