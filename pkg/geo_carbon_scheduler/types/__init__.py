"""Type definitions for the scheduler."""

from .models import *
from .traces import *

__all__ = [
    # Serializable models
    "ServiceConfig",
    "ApiResponse",
    "RunConfig",
    "PolicySpec",
    "ProvisioningPlan",
    "RoutingWeights",
    "RegionHourStats",
    "HourlyReport",
    "RegionProvisioning",
    "SummaryReport",
    "SimulationResult",
    "PolicyResult",
    "RunManifest",
    "ComparisonReport",
    "FileDiagnostic",
    "ValidationReport",
    # Numeric value types
    "RegionSet",
    "LatencyMatrix",
    "HourlyTrace",
    "CarbonTrace",
    "WorkloadTrace",
    "TraceBundle",
    "CapInstance",
    "as_vector",
]
