import numpy as np
import pytest

import naive
from tradenet.config import AnalysisConfig, load_config, parse_config_text
from tradenet.errors import IngestError, ValidationError
from tradenet.ingest import (
    great_circle_km,
    great_circle_matrix,
    read_countries,
    read_dyads,
    read_flows,
)
from tradenet.synthetic import synthetic_world, write_world_csv

COUNTRY_HEADER = (
    "id,acronym,name,gdp,population,area_km2,landlocked,"
    "continent,region,cpi,latitude,longitude\n"
)


def toy_countries(tmp_path):
    path = tmp_path / "countries.csv"
    path.write_text(
        COUNTRY_HEADER
        + "1,AAA,Alpha,1e9,1e6,1e5,0,west,north,100,0,0\n"
        + "2,BBB,Beta,2e9,2e6,2e5,1,west,north,100,0,90\n"
        + "3,CCC,Gamma,3e9,3e6,3e5,0,east,south,100,45,180\n"
    )
    return path


def toy_flows(tmp_path, rows=None):
    path = tmp_path / "flows.csv"
    body = rows or [
        "1,2,2000,10",
        "2,1,2000,20",
        "1,3,2000,5",
        "3,1,2000,0",
        "2,3,2000,7",
        "3,2,2000,9",
        "1,2,1999,999",
    ]
    path.write_text("exporter_id,importer_id,year,value\n" + "\n".join(body) + "\n")
    return path


def toy_dyads(tmp_path, rows=None):
    path = tmp_path / "dyads.csv"
    header = (
        "id_a,id_b,distance_km,contiguity,common_currency,common_language,"
        "colony,trade_agreement,common_religion,exchange_rate\n"
    )
    body = rows or [
        "1,2,100,1,0,1,0,1,0,1.5",
        "1,3,200,0,0,0,0,0,1,2.0",
        "2,3,300,0,1,0,1,0,0,0.5",
    ]
    path.write_text(header + "\n".join(body) + "\n")
    return path


class TestGreatCircle:
    def test_quarter_meridian(self):
        # (0, 0) to (0, 90): a quarter of the equator
        assert great_circle_km(0.0, 0.0, 0.0, 90.0) == pytest.approx(
            np.pi / 2 * 6371.0, rel=1e-12
        )

    def test_matches_law_of_cosines(self):
        rng = np.random.default_rng(0)
        for _ in range(25):
            lat1, lat2 = rng.uniform(-80, 80, 2)
            lon1, lon2 = rng.uniform(-179, 179, 2)
            hav = great_circle_km(lat1, lon1, lat2, lon2)
            loc = naive.spherical_law_of_cosines_km(lat1, lon1, lat2, lon2)
            assert hav == pytest.approx(loc, rel=1e-6, abs=1e-6)

    def test_matrix_agrees_with_scalar(self):
        rng = np.random.default_rng(1)
        lat = rng.uniform(-60, 60, 5)
        lon = rng.uniform(-170, 170, 5)
        mat = great_circle_matrix(lat, lon)
        assert mat[2, 2] == 0.0
        assert mat[1, 3] == pytest.approx(
            great_circle_km(lat[1], lon[1], lat[3], lon[3]), rel=1e-12
        )


class TestReadCountries:
    def test_toy_fixture(self, tmp_path):
        table = read_countries(toy_countries(tmp_path))
        assert table.n == 3
        assert table.acronyms == ("AAA", "BBB", "CCC")
        assert table.landlocked.tolist() == [False, True, False]
        assert table.has_coordinates()

    def test_duplicate_id_rejected(self, tmp_path):
        path = tmp_path / "countries.csv"
        path.write_text(
            COUNTRY_HEADER
            + "1,AAA,Alpha,1,1,1,0,w,n,100,0,0\n"
            + "1,BBB,Beta,1,1,1,0,w,n,100,0,0\n"
        )
        with pytest.raises(IngestError, match="3"):
            read_countries(path)

    def test_missing_column_rejected(self, tmp_path):
        path = tmp_path / "countries.csv"
        path.write_text("id,acronym\n1,AAA\n")
        with pytest.raises(IngestError, match="gdp"):
            read_countries(path)

    def test_non_numeric_value_carries_line(self, tmp_path):
        path = tmp_path / "countries.csv"
        path.write_text(
            COUNTRY_HEADER
            + "1,AAA,Alpha,abc,1,1,0,w,n,100,0,0\n"
        )
        with pytest.raises(IngestError, match=":2"):
            read_countries(path)


class TestReadFlows:
    def test_year_filter_and_shape(self, tmp_path):
        table = read_countries(toy_countries(tmp_path))
        flows = read_flows(toy_flows(tmp_path), table, 2000)
        assert flows.n == 3
        assert flows.values[0, 1] == 10.0
        assert flows.values[1, 0] == 20.0
        assert flows.values[2, 0] == 0.0

    def test_unknown_id_named(self, tmp_path):
        table = read_countries(toy_countries(tmp_path))
        path = toy_flows(tmp_path, rows=["1,9,2000,3"])
        with pytest.raises(IngestError, match="9"):
            read_flows(path, table, 2000)

    def test_missing_year_rejected(self, tmp_path):
        table = read_countries(toy_countries(tmp_path))
        with pytest.raises(IngestError, match="1984"):
            read_flows(toy_flows(tmp_path), table, 1984)

    def test_duplicate_flow_rejected(self, tmp_path):
        table = read_countries(toy_countries(tmp_path))
        path = toy_flows(tmp_path, rows=["1,2,2000,3", "1,2,2000,4"])
        with pytest.raises(IngestError, match="duplicate"):
            read_flows(path, table, 2000)

    def test_negative_value_rejected(self, tmp_path):
        table = read_countries(toy_countries(tmp_path))
        path = toy_flows(tmp_path, rows=["1,2,2000,-3"])
        with pytest.raises(IngestError, match="nonnegative"):
            read_flows(path, table, 2000)

    def test_self_flow_rejected(self, tmp_path):
        table = read_countries(toy_countries(tmp_path))
        path = toy_flows(tmp_path, rows=["1,1,2000,3"])
        with pytest.raises(IngestError, match="self-flow"):
            read_flows(path, table, 2000)


class TestReadDyads:
    def test_toy_fixture(self, tmp_path):
        table = read_countries(toy_countries(tmp_path))
        dyads = read_dyads(toy_dyads(tmp_path), table)
        assert dyads.distance_km[0, 1] == 100.0
        assert dyads.contiguity[1, 0] == 1.0
        assert dyads.common_religion[0, 2] == 1.0

    def test_ordering_enforced(self, tmp_path):
        table = read_countries(toy_countries(tmp_path))
        path = toy_dyads(tmp_path, rows=["2,1,100,0,0,0,0,0,0,1"])
        with pytest.raises(IngestError, match="id_a < id_b"):
            read_dyads(path, table)

    def test_duplicate_dyad_rejected(self, tmp_path):
        table = read_countries(toy_countries(tmp_path))
        path = toy_dyads(
            tmp_path,
            rows=["1,2,100,0,0,0,0,0,0,1", "1,2,100,0,0,0,0,0,0,1"],
        )
        with pytest.raises(IngestError, match="duplicate"):
            read_dyads(path, table)

    def test_distance_falls_back_to_coordinates(self, tmp_path):
        table = read_countries(toy_countries(tmp_path))
        path = tmp_path / "dyads.csv"
        path.write_text(
            "id_a,id_b,contiguity,common_currency,common_language,"
            "colony,trade_agreement,common_religion,exchange_rate\n"
            "1,2,0,0,0,0,0,0,1\n"
            "1,3,0,0,0,0,0,0,1\n"
            "2,3,0,0,0,0,0,0,1\n"
        )
        dyads = read_dyads(path, table)
        assert dyads.distance_km[0, 1] == pytest.approx(
            np.pi / 2 * 6371.0, rel=1e-9
        )

    def test_distance_file_overrides(self, tmp_path):
        table = read_countries(toy_countries(tmp_path))
        dist_path = tmp_path / "distances.csv"
        dist_path.write_text("id_a,id_b,distance_km\n1,2,123.0\n")
        dyads = read_dyads(toy_dyads(tmp_path), table, distance_path=dist_path)
        assert dyads.distance_km[0, 1] == 123.0
        assert dyads.distance_km[0, 2] == 200.0

    def test_bad_dummy_value_rejected(self, tmp_path):
        table = read_countries(toy_countries(tmp_path))
        path = toy_dyads(tmp_path, rows=["1,2,100,2,0,0,0,0,0,1"])
        with pytest.raises(IngestError, match="contiguity"):
            read_dyads(path, table)


class TestRoundTrip:
    def test_synthetic_world_round_trips(self, tmp_path):
        world = synthetic_world(8, seed=11, zero_inflation=0.3)
        paths = write_world_csv(world, tmp_path)
        table = read_countries(paths["countries"])
        flows = read_flows(paths["flows"], table, 2000)
        dyads = read_dyads(paths["dyads"], table)
        np.testing.assert_allclose(flows.values, world.flows.values, rtol=1e-12)
        np.testing.assert_allclose(
            dyads.distance_km, world.dyads.distance_km, rtol=1e-12
        )
        np.testing.assert_array_equal(dyads.colony, world.dyads.colony)
        np.testing.assert_allclose(table.gdp, world.countries.gdp, rtol=1e-15)


class TestConfig:
    def test_parse_and_override(self, tmp_path):
        world = synthetic_world(5, seed=0)
        paths = write_world_csv(world, tmp_path)
        cfg_path = tmp_path / "run.cfg"
        cfg_path.write_text(
            f"flows={paths['flows']}\n"
            f"countries={paths['countries']}\n"
            f"dyads={paths['dyads']}\n"
            "year=2000\n"
            "estimator=ppml  # comment\n"
            "selection=on\n"
        )
        cfg = load_config(cfg_path)
        assert cfg.estimator == "ppml"
        assert cfg.selection is True
        over = load_config(cfg_path, {"estimator": "zippml", "seed": 7})
        assert over.estimator == "zippml"
        assert over.seed == 7

    def test_unknown_key_rejected(self):
        with pytest.raises(ValidationError, match="unknown config key"):
            parse_config_text("nonsense=1\n")

    def test_missing_file_rejected(self, tmp_path):
        cfg = AnalysisConfig(
            flows=str(tmp_path / "nope.csv"),
            countries=str(tmp_path / "nope.csv"),
            dyads=str(tmp_path / "nope.csv"),
        )
        with pytest.raises(ValidationError, match="does not exist"):
            cfg.validate()

    def test_alpha_bounds(self, tmp_path):
        world = synthetic_world(4, seed=0)
        paths = write_world_csv(world, tmp_path)
        cfg = AnalysisConfig(
            flows=paths["flows"],
            countries=paths["countries"],
            dyads=paths["dyads"],
            selection_alpha=1.2,
        )
        with pytest.raises(ValidationError, match="selection_alpha"):
            cfg.validate()

    def test_bad_boolean_named(self):
        with pytest.raises(ValidationError, match="boolean"):
            parse_config_text("selection=maybe\n")
