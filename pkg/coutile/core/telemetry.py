import os
from opentelemetry import trace
from opentelemetry.sdk.resources import Resource
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import BatchSpanProcessor
from opentelemetry.exporter.otlp.proto.grpc.trace_exporter import OTLPSpanExporter
from loguru import logger

from coutile.core.config import get_settings

tracer = trace.get_tracer("coutile")


def setup_telemetry() -> bool:
    """
    Initialize OpenTelemetry tracing when an OTLP endpoint is configured.

    Registers a tracer provider exporting over OTLP/gRPC using OTEL_EXPORTER_OTLP_ENDPOINT
    and OTEL_EXPORTER_OTLP_INSECURE. Without an endpoint tracing stays a no-op; the spans
    opened by the simulator cost nothing in that case. Setup failures are logged, not raised.

    Returns:
        bool: True when a provider was installed.
    """
    endpoint = os.getenv("OTEL_EXPORTER_OTLP_ENDPOINT")
    if not endpoint:
        logger.debug("No endpoint configured. Telemetry disabled.")
        return False
    if getattr(setup_telemetry, "_installed", False):
        return True
    try:
        settings = get_settings()
        resource = Resource.create(
            {
                "service.name": settings.OTEL_SERVICE_NAME,
                "deployment.environment": settings.ENVIRONMENT,
            }
        )

        insecure = os.getenv("OTEL_EXPORTER_OTLP_INSECURE", "false").lower() == "true"

        tracer_provider = TracerProvider(resource=resource)
        span_exporter = OTLPSpanExporter(endpoint=endpoint, insecure=insecure)
        tracer_provider.add_span_processor(BatchSpanProcessor(span_exporter))
        trace.set_tracer_provider(tracer_provider)
        setup_telemetry._installed = True  # type: ignore

        logger.info("Traces Active.")
        return True

    except Exception as e:
        logger.error(f"Traces Setup Failed: {e}")
        return False
