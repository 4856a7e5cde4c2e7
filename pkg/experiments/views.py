from django.http import HttpResponse, JsonResponse
from django.shortcuts import get_object_or_404
from drf_spectacular.types import OpenApiTypes
from drf_spectacular.utils import OpenApiParameter, extend_schema
from rest_framework.decorators import api_view
from rest_framework.response import Response

from .models import Campaign
from .reports import write_table
from .serializers import CampaignDetailSerializer, CampaignSerializer, DropRecordSerializer


def health_check(request):
    """Health check endpoint for monitoring services"""
    return JsonResponse({
        "status": "healthy",
        "service": "Cell-free SWIPT simulator"
    })


@extend_schema(
    tags=['Campaigns'],
    summary='List experiment campaigns',
    description='All campaigns, newest first. Optionally filter by kind and status.',
    parameters=[
        OpenApiParameter(
            name='kind',
            type=OpenApiTypes.STR,
            location=OpenApiParameter.QUERY,
            enum=Campaign.Kind.values,
            required=False,
        ),
        OpenApiParameter(
            name='status',
            type=OpenApiTypes.STR,
            location=OpenApiParameter.QUERY,
            enum=Campaign.Status.values,
            required=False,
        ),
    ],
    responses={200: CampaignSerializer(many=True)},
)
@api_view(['GET'])
def list_campaigns(request):
    campaigns = Campaign.objects.all()

    kind_filter = request.query_params.get('kind')
    if kind_filter:
        campaigns = campaigns.filter(kind=kind_filter)

    status_filter = request.query_params.get('status')
    if status_filter:
        campaigns = campaigns.filter(status=status_filter)

    serializer = CampaignSerializer(campaigns, many=True)
    return Response(serializer.data)


@extend_schema(
    tags=['Campaigns'],
    summary='Get a campaign',
    description='Scenario, parameters, status and the summary of one campaign.',
    responses={200: CampaignDetailSerializer, 404: OpenApiTypes.OBJECT},
)
@api_view(['GET'])
def get_campaign(request, campaign_id):
    campaign = get_object_or_404(Campaign, id=campaign_id)
    serializer = CampaignDetailSerializer(campaign)
    return Response(serializer.data)


@extend_schema(
    tags=['Campaigns'],
    summary="List a campaign's drop records",
    description='One record per drop, algorithm and sweep point, in drop order.',
    parameters=[
        OpenApiParameter(
            name='algorithm',
            type=OpenApiTypes.STR,
            location=OpenApiParameter.QUERY,
            description="Algorithm label, e.g. 'proposed' or 'ts_tau20'",
            required=False,
        ),
        OpenApiParameter(
            name='feasible',
            type=OpenApiTypes.BOOL,
            location=OpenApiParameter.QUERY,
            required=False,
        ),
    ],
    responses={200: DropRecordSerializer(many=True), 404: OpenApiTypes.OBJECT},
)
@api_view(['GET'])
def list_drop_records(request, campaign_id):
    campaign = get_object_or_404(Campaign, id=campaign_id)
    records = campaign.drop_records.all()

    algorithm_filter = request.query_params.get('algorithm')
    if algorithm_filter:
        records = records.filter(algorithm=algorithm_filter)

    feasible_filter = request.query_params.get('feasible')
    if feasible_filter is not None:
        records = records.filter(feasible=feasible_filter.lower() in ('1', 'true', 'yes'))

    serializer = DropRecordSerializer(records, many=True)
    return Response(serializer.data)


@extend_schema(
    tags=['Campaigns'],
    summary='Export campaign aggregates as CSV',
    description=(
        'Long-format table (sweep_var, sweep_value, algorithm, metric, value, stderr), '
        'the same rows the campaign wrote to its output directory. '
        'Only completed campaigns have a table.'
    ),
    responses={(200, 'text/csv'): OpenApiTypes.STR, 404: OpenApiTypes.OBJECT, 409: OpenApiTypes.OBJECT},
)
@api_view(['GET'])
def export_campaign_csv(request, campaign_id):
    campaign = get_object_or_404(Campaign, id=campaign_id)
    if campaign.status != Campaign.Status.COMPLETED:
        return Response(
            {'error': f'Campaign is {campaign.status}, no table to export'},
            status=409,
        )

    response = HttpResponse(content_type='text/csv')
    response['Content-Disposition'] = f'attachment; filename="{campaign.kind}_{campaign.id.hex[:8]}.csv"'
    write_table((campaign.summary or {}).get('rows', []), response)
    return response
