from django.urls import path
from . import views

app_name = 'experiments'

urlpatterns = [
    path('campaigns/', views.list_campaigns, name='list_campaigns'),
    path('campaigns/<uuid:campaign_id>/', views.get_campaign, name='get_campaign'),
    path('campaigns/<uuid:campaign_id>/drops/', views.list_drop_records, name='list_drop_records'),

    # Export
    path('campaigns/<uuid:campaign_id>/export-csv/', views.export_campaign_csv, name='export_campaign_csv'),
]
