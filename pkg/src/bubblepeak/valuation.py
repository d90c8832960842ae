"""Housing-stock valuation arithmetic and stock-versus-flow comparisons."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Union

METHODS = ("per_person", "per_flat")


@dataclass(frozen=True)
class StockEstimate:
    method: str
    population_or_flats: float
    area_per_unit: float
    price_per_m2: float
    total: float

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "population_or_flats": self.population_or_flats,
            "area_per_unit": self.area_per_unit,
            "price_per_m2": self.price_per_m2,
            "total": self.total,
        }


@dataclass(frozen=True)
class ComparisonRatio:
    label: str
    reference_value: float
    ratio: float

    def to_dict(self) -> dict:
        return {"label": self.label, "reference_value": self.reference_value, "ratio": self.ratio}


def stock_value(count: float, area_per_unit: float, price_per_m2: float,
                method: str = "per_person") -> StockEstimate:
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    for name, x in (("count", count), ("area_per_unit", area_per_unit), ("price_per_m2", price_per_m2)):
        if not x > 0:
            raise ValueError(f"{name} must be positive, got {x}")
    return StockEstimate(method, count, area_per_unit, price_per_m2, count * area_per_unit * price_per_m2)


def convert(amount: float, rate: float) -> float:
    """Amount in the home currency divided by home-currency units per target unit."""
    if not rate > 0:
        raise ValueError(f"exchange rate must be positive, got {rate}")
    return amount / rate


def annual_change_vs_flow(stock: float, decline_rate: float, flow: float,
                          label: Optional[str] = None) -> ComparisonRatio:
    """(stock * decline_rate) / flow: a yearly loss in stock value against an annual flow."""
    if not 0 < decline_rate < 1:
        raise ValueError(f"decline rate must be in (0, 1), got {decline_rate}")
    if not flow > 0:
        raise ValueError(f"flow must be positive, got {flow}")
    return ComparisonRatio(
        label=label or f"(stock * {decline_rate}) / flow",
        reference_value=flow,
        ratio=stock * decline_rate / flow,
    )


def reference_vs_stock(reference: float, stock: float, label: Optional[str] = None) -> ComparisonRatio:
    """reference / stock, for comparing a flow or holding directly with the stock."""
    if not reference > 0 or not stock > 0:
        raise ValueError("reference and stock must be positive")
    return ComparisonRatio(label=label or "reference / stock", reference_value=reference,
                           ratio=reference / stock)


def load_scenario(path: Union[str, Path, None] = None) -> dict:
    """Read a scenario file; without a path, the bundled 2015 Hong Kong preset."""
    if path is None:
        text = resources.files("bubblepeak.data").joinpath("hk2015_valuation.json").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return json.loads(text)


def _value(scenario: dict, key: str) -> float:
    entry = scenario["inputs"][key]
    return float(entry["value"] if isinstance(entry, dict) else entry)


def run_scenario(scenario: dict) -> dict:
    """Stock estimates, currency conversions and the three comparison items."""
    v = lambda k: _value(scenario, k)  # noqa: E731
    per_person = stock_value(v("persons"), v("area_per_person_m2"), v("price_per_m2"), "per_person")
    per_flat = stock_value(v("flats"), v("area_per_flat_m2"), v("price_per_m2"), "per_flat")
    stock = v("retained_stock")
    stock_rmb = convert(stock, v("hkd_per_rmb"))
    stock_usd = convert(stock, v("hkd_per_usd"))

    items = [
        reference_vs_stock(v("hk_government_revenue"), stock,
                           "HK government revenue (HKD) / stock (HKD)"),
        reference_vs_stock(v("china_government_revenue_rmb"), stock_rmb,
                           "China government revenue (RMB) / stock (RMB)"),
        reference_vs_stock(v("china_treasury_holdings_usd"), stock_usd,
                           "China US-Treasury holdings (USD) / stock (USD)"),
    ]
    flows = [
        annual_change_vs_flow(stock, v("annual_decline_rate"), v("hk_government_revenue"),
                              "(stock * decline rate) / HK government revenue"),
        annual_change_vs_flow(stock_rmb, v("annual_decline_rate"), v("china_government_revenue_rmb"),
                              "(stock * decline rate) / China government revenue"),
    ]
    return {
        "scenario": scenario.get("name", ""),
        "stock_estimates": [per_person.to_dict(), per_flat.to_dict()],
        "retained_stock_hkd": stock,
        "stock_rmb": stock_rmb,
        "stock_usd": stock_usd,
        "annual_stock_change_hkd": stock * v("annual_decline_rate"),
        "comparisons": [c.to_dict() for c in items],
        "flow_comparisons": [c.to_dict() for c in flows],
    }
