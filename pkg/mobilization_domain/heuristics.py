"""Efficiency functions γ that order every choice the planner makes."""
from mobilization_domain.model import (
    EnterpriseEnvironment,
    MobilizationTask,
    ProductionLine,
    Vehicle,
)


def gamma_task(task: MobilizationTask) -> float:
    """Urgency: amount per hour of deadline."""
    return task.amount / task.deadline


def gamma_line(line: ProductionLine, product_id: str) -> float:
    """Output per unit of cost for `product_id`."""
    capability = line.capability_for(product_id)
    return capability.rate / capability.cost_rate


def gamma_vehicle(vehicle: Vehicle) -> float:
    return vehicle.speed / vehicle.trip_cost


def rank_lines(env: EnterpriseEnvironment, product_id: str) -> list[ProductionLine]:
    return sorted(
        env.capable_lines(product_id),
        key=lambda line: (-gamma_line(line, product_id), line.line_id),
    )


def rank_vehicles(env: EnterpriseEnvironment, product_id: str) -> list[Vehicle]:
    return sorted(
        env.capable_vehicles(product_id),
        key=lambda vehicle: (-gamma_vehicle(vehicle), vehicle.vehicle_id),
    )
