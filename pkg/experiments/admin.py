from django.contrib import admin
from django.urls import reverse
from django.utils.html import format_html
from .models import Campaign, DropRecord


class DropRecordInline(admin.TabularInline):
    model = DropRecord
    extra = 0
    can_delete = False
    fields = ['drop_index', 'algorithm', 'sweep_var', 'sweep_value', 'feasible', 'objective', 'iterations']
    readonly_fields = fields
    show_change_link = True


@admin.register(Campaign)
class CampaignAdmin(admin.ModelAdmin):
    list_display = ['id', 'kind', 'status', 'drops', 'seed', 'config_hash_short', 'created_at', 'completed_at']
    list_filter = ['kind', 'status', 'created_at']
    search_fields = ['id', 'config_hash', 'output_dir']
    readonly_fields = ['id', 'config_hash', 'created_at', 'started_at', 'completed_at', 'csv_export_link']
    inlines = [DropRecordInline]

    fieldsets = (
        ('Basic Info', {
            'fields': ('id', 'kind', 'seed', 'drops', 'workers', 'output_dir')
        }),
        ('Status', {
            'fields': ('status', 'error_message', 'csv_export_link')
        }),
        ('Scenario (JSON)', {
            'fields': ('config_hash', 'scenario', 'parameters'),
            'classes': ('collapse',)
        }),
        ('Summary (JSON)', {
            'fields': ('summary',),
            'classes': ('collapse',)
        }),
        ('Timestamps', {
            'fields': ('created_at', 'started_at', 'completed_at'),
            'classes': ('collapse',)
        }),
    )

    def config_hash_short(self, obj):
        return obj.config_hash[:12]

    config_hash_short.short_description = 'Config hash'

    def csv_export_link(self, obj):
        if not obj.pk or obj.status != Campaign.Status.COMPLETED:
            return format_html('<span style="color: gray;">Available once the campaign completes</span>')
        url = reverse('experiments:export_campaign_csv', args=[obj.pk])
        return format_html('<a href="{}">Download long-format CSV</a>', url)

    csv_export_link.short_description = 'Export'


@admin.register(DropRecord)
class DropRecordAdmin(admin.ModelAdmin):
    list_display = ['campaign', 'drop_index', 'algorithm', 'sweep_var', 'sweep_value', 'feasible', 'objective', 'iterations']
    list_filter = ['algorithm', 'feasible', 'campaign__kind']
    search_fields = ['campaign__id', 'algorithm']
    readonly_fields = ['campaign', 'drop_index', 'algorithm', 'sweep_var', 'sweep_value', 'feasible', 'objective', 'iterations']
